#include "freedst/vgae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "freedst/kernels.hpp"
#include "freedst/link_eval.hpp"

namespace freedst {

namespace {

void require(bool ok, Errc code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void add_in_place(Matrix& a, const Matrix& b) {
  auto& ad = a.data();
  const auto& bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) ad[i] += bd[i];
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

VgaeParams VgaeParams::zeros(std::size_t n_features, std::size_t hidden, std::size_t latent) {
  return {Matrix(n_features, hidden), Matrix(hidden, latent), Matrix(hidden, latent)};
}

void TrainConfig::validate() const {
  require(hidden_dim > 0, Errc::Config, "hidden_dim must be positive");
  require(latent_dim > 0, Errc::Config, "latent_dim must be positive");
  require(learning_rate > 0.0, Errc::Config, "learning_rate must be positive");
  require(kl_weight > 0.0, Errc::Config, "kl_weight must be positive");
  require(adam_beta1 > 0.0 && adam_beta1 < 1.0, Errc::Config, "adam_beta1 must lie in (0, 1)");
  require(adam_beta2 > 0.0 && adam_beta2 < 1.0, Errc::Config, "adam_beta2 must lie in (0, 1)");
  require(adam_epsilon > 0.0, Errc::Config, "adam_epsilon must be positive");
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  return {{"hidden_dim", c.hidden_dim},   {"latent_dim", c.latent_dim}, {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},           {"kl_weight", c.kl_weight},   {"seed", c.seed},
          {"adam_beta1", c.adam_beta1},   {"adam_beta2", c.adam_beta2}, {"adam_epsilon", c.adam_epsilon}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.kl_weight = j.value("kl_weight", c.kl_weight);
  c.seed = j.value("seed", c.seed);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
  return c;
}

Matrix normalize_adjacency(const Matrix& adjacency) {
  require(adjacency.rows() == adjacency.cols(), Errc::NonSquare, "adjacency must be square, got " + shape(adjacency));
  const std::size_t n = adjacency.rows();
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = adjacency.row(i);
    const double deg = std::accumulate(row.begin(), row.end(), 0.0) + 1.0;
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adjacency(i, j) + (i == j ? 1.0 : 0.0);
      if (a != 0.0) out(i, j) = a * inv_sqrt_deg[i] * inv_sqrt_deg[j];
    }
  }
  return out;
}

namespace {

void check_encoder_dims(const Matrix& features, const Matrix& norm_adj, const VgaeParams& p) {
  require(norm_adj.rows() == norm_adj.cols(), Errc::NonSquare, "normalised adjacency must be square");
  require(features.rows() == norm_adj.rows(), Errc::DimensionMismatch,
          "features " + shape(features) + " do not match adjacency " + shape(norm_adj));
  require(features.cols() == p.w_shared.rows(), Errc::DimensionMismatch,
          "features " + shape(features) + " do not match w_shared " + shape(p.w_shared));
  require(p.w_mu.rows() == p.w_shared.cols() && p.w_logvar.rows() == p.w_shared.cols(), Errc::DimensionMismatch,
          "head weights do not match hidden width " + std::to_string(p.w_shared.cols()));
  require(p.w_mu.cols() == p.w_logvar.cols(), Errc::DimensionMismatch,
          "w_mu " + shape(p.w_mu) + " and w_logvar " + shape(p.w_logvar) + " differ");
}

struct Forward {
  Matrix pre;  // Â X W_shared
  Matrix ah;   // Â relu(pre)
  Matrix mu;
  Matrix logvar;
};

Forward forward(const Matrix& ax, const Matrix& norm_adj, const VgaeParams& p) {
  Forward f;
  f.pre = kernels::matmul(ax, p.w_shared);
  Matrix h = f.pre;
  for (auto& x : h.data()) x = std::max(x, 0.0);
  f.ah = kernels::matmul(norm_adj, h);
  f.mu = kernels::matmul(f.ah, p.w_mu);
  f.logvar = kernels::matmul(f.ah, p.w_logvar);
  return f;
}

}  // namespace

Encoding encode(const Matrix& features, const Matrix& norm_adj, const VgaeParams& params) {
  check_encoder_dims(features, norm_adj, params);
  const Matrix ax = kernels::matmul(norm_adj, features);
  Forward f = forward(ax, norm_adj, params);
  return {std::move(f.mu), std::move(f.logvar)};
}

Matrix sample_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix eps(rows, cols);
  for (auto& x : eps.data()) x = rng.normal();
  return eps;
}

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& noise) {
  require(mu.same_shape(logvar) && mu.same_shape(noise), Errc::DimensionMismatch,
          "reparameterize: mu " + shape(mu) + ", logvar " + shape(logvar) + ", noise " + shape(noise));
  Matrix z(mu.rows(), mu.cols());
  for (std::size_t k = 0; k < z.size(); ++k) {
    z.data()[k] = mu.data()[k] + std::exp(0.5 * logvar.data()[k]) * noise.data()[k];
  }
  return z;
}

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, Rng& rng) {
  require(mu.same_shape(logvar), Errc::DimensionMismatch,
          "reparameterize: mu " + shape(mu) + " and logvar " + shape(logvar) + " differ");
  return reparameterize(mu, logvar, sample_noise(mu.rows(), mu.cols(), rng));
}

double decode_edge(const Matrix& z, std::size_t i, std::size_t j) {
  require(i < z.rows() && j < z.rows(), Errc::IndexOutOfRange,
          "node index out of range for " + std::to_string(z.rows()) + " embeddings");
  const auto zi = z.row(i);
  const auto zj = z.row(j);
  double dot = 0.0;
  for (std::size_t k = 0; k < zi.size(); ++k) dot += zi[k] * zj[k];
  return kernels::sigmoid(dot);
}

double reconstruction_loss(const Matrix& adjacency, const Matrix& z, double pos_weight) {
  require(pos_weight > 0.0, Errc::Config, "pos_weight must be positive");
  require(adjacency.rows() == z.rows() && adjacency.cols() == z.rows(), Errc::DimensionMismatch,
          "adjacency " + shape(adjacency) + " does not match embeddings " + shape(z));
  return kernels::weighted_bce(kernels::matmul_nt(z, z), adjacency, pos_weight).loss;
}

double kl_divergence(const Matrix& mu, const Matrix& logvar) {
  require(mu.same_shape(logvar), Errc::DimensionMismatch,
          "kl_divergence: mu " + shape(mu) + " and logvar " + shape(logvar) + " differ");
  if (mu.rows() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double m = mu.data()[k];
    const double lv = logvar.data()[k];
    sum += 1.0 + lv - m * m - std::exp(lv);
  }
  return -0.5 * sum / static_cast<double>(mu.rows());
}

double default_pos_weight(const Matrix& adjacency) {
  double ones = 0.0;
  for (double a : adjacency.data()) ones += a > 0.5 ? 1.0 : 0.0;
  if (ones == 0.0) return 1.0;
  return (static_cast<double>(adjacency.size()) - ones) / ones;
}

VgaeObjective::VgaeObjective(const Matrix& features, const Matrix& train_adjacency, double kl_weight)
    : features_(features),
      norm_adj_(normalize_adjacency(train_adjacency)),
      targets_(train_adjacency),
      pos_weight_(default_pos_weight(train_adjacency)),
      kl_weight_(kl_weight) {
  require(features_.rows() == targets_.rows(), Errc::DimensionMismatch,
          "features " + shape(features_) + " do not match adjacency " + shape(targets_));
  ax_ = kernels::matmul(norm_adj_, features_);
}

LossParts VgaeObjective::loss(const VgaeParams& params, const Matrix& noise) const {
  check_encoder_dims(features_, norm_adj_, params);
  const Forward f = forward(ax_, norm_adj_, params);
  const Matrix z = reparameterize(f.mu, f.logvar, noise);
  LossParts out;
  out.bce = kernels::weighted_bce(kernels::matmul_nt(z, z), targets_, pos_weight_).loss;
  out.kl = kl_divergence(f.mu, f.logvar);
  out.total = out.bce + kl_weight_ * out.kl;
  return out;
}

LossParts VgaeObjective::loss_and_grad(const VgaeParams& params, const Matrix& noise, Gradients& grads) const {
  check_encoder_dims(features_, norm_adj_, params);
  const Forward f = forward(ax_, norm_adj_, params);
  require(noise.same_shape(f.mu), Errc::DimensionMismatch, "noise " + shape(noise) + " does not match " + shape(f.mu));

  const std::size_t n = f.mu.rows();
  Matrix sd(f.logvar.rows(), f.logvar.cols());
  for (std::size_t k = 0; k < sd.size(); ++k) sd.data()[k] = std::exp(0.5 * f.logvar.data()[k]);
  Matrix z(n, f.mu.cols());
  for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = f.mu.data()[k] + sd.data()[k] * noise.data()[k];

  auto bce = kernels::weighted_bce(kernels::matmul_nt(z, z), targets_, pos_weight_);
  LossParts out;
  out.bce = bce.loss;
  out.kl = kl_divergence(f.mu, f.logvar);
  out.total = out.bce + kl_weight_ * out.kl;

  // logits = Z Z^T  =>  dZ = dS Z + dS^T Z
  Matrix dz = kernels::matmul(bce.grad, z);
  add_in_place(dz, kernels::matmul_tn(bce.grad, z));

  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  Matrix dmu(n, f.mu.cols());
  Matrix dlogvar(n, f.mu.cols());
  for (std::size_t k = 0; k < dz.size(); ++k) {
    const double lv = f.logvar.data()[k];
    dmu.data()[k] = dz.data()[k] + kl_weight_ * inv_n * f.mu.data()[k];
    dlogvar.data()[k] = dz.data()[k] * noise.data()[k] * 0.5 * sd.data()[k] +
                        kl_weight_ * 0.5 * inv_n * (std::exp(lv) - 1.0);
  }

  grads.w_mu = kernels::matmul_tn(f.ah, dmu);
  grads.w_logvar = kernels::matmul_tn(f.ah, dlogvar);

  Matrix dah = kernels::matmul_nt(dmu, params.w_mu);
  add_in_place(dah, kernels::matmul_nt(dlogvar, params.w_logvar));
  Matrix dpre = kernels::matmul_tn(norm_adj_, dah);
  for (std::size_t k = 0; k < dpre.size(); ++k) {
    if (!(f.pre.data()[k] > 0.0)) dpre.data()[k] = 0.0;
  }
  grads.w_shared = kernels::matmul_tn(ax_, dpre);
  return out;
}

VgaeParams glorot_init(std::size_t n_features, std::size_t hidden, std::size_t latent, Rng& rng) {
  auto fill = [&rng](Matrix& m) {
    const double r = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (auto& x : m.data()) x = rng.uniform(-r, r);
  };
  VgaeParams p = VgaeParams::zeros(n_features, hidden, latent);
  fill(p.w_shared);
  fill(p.w_mu);
  fill(p.w_logvar);
  return p;
}

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kGradCheckStream = 0xC4EC;

std::uint64_t epoch_stream(std::size_t epoch) { return 1 + static_cast<std::uint64_t>(epoch); }

class Adam {
 public:
  Adam(const TrainConfig& c, const VgaeParams& shape_like)
      : c_(c), m_(zeros_like(shape_like)), v_(zeros_like(shape_like)) {}

  void step(VgaeParams& p, const Gradients& g) {
    ++t_;
    const double bc1 = 1.0 - std::pow(c_.adam_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(c_.adam_beta2, static_cast<double>(t_));
    update(p.w_shared, g.w_shared, m_.w_shared, v_.w_shared, bc1, bc2);
    update(p.w_mu, g.w_mu, m_.w_mu, v_.w_mu, bc1, bc2);
    update(p.w_logvar, g.w_logvar, m_.w_logvar, v_.w_logvar, bc1, bc2);
  }

 private:
  static VgaeParams zeros_like(const VgaeParams& p) {
    return VgaeParams::zeros(p.n_features(), p.hidden(), p.latent());
  }

  void update(Matrix& w, const Matrix& g, Matrix& m, Matrix& v, double bc1, double bc2) const {
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g.data()[k];
      double& mk = m.data()[k];
      double& vk = v.data()[k];
      mk = c_.adam_beta1 * mk + (1.0 - c_.adam_beta1) * gk;
      vk = c_.adam_beta2 * vk + (1.0 - c_.adam_beta2) * gk * gk;
      w.data()[k] -= c_.learning_rate * (mk / bc1) / (std::sqrt(vk / bc2) + c_.adam_epsilon);
    }
  }

  TrainConfig c_;
  VgaeParams m_;
  VgaeParams v_;
  std::size_t t_ = 0;
};

std::optional<double> split_auc(const Matrix& mu, const std::vector<Edge>& pos, const std::vector<Edge>& neg) {
  if (pos.empty() || neg.empty()) return std::nullopt;
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const auto& [i, j] : pos) {
    scores.push_back(decode_edge(mu, i, j));
    labels.push_back(true);
  }
  for (const auto& [i, j] : neg) {
    scores.push_back(decode_edge(mu, i, j));
    labels.push_back(false);
  }
  return auc(scores, labels);
}

}  // namespace

TrainResult train(const StateGraph& graph, const EdgeSplit& split, const TrainConfig& config) {
  config.validate();
  if (split.train.empty()) throw Error(Errc::EmptyTrainSet, "training needs at least one train edge");

  const std::size_t n = graph.node_count();
  const VgaeObjective objective(identity_features(graph), graph.adjacency(split.train), config.kl_weight);

  Rng init_rng(Rng::derive(config.seed, kInitStream));
  TrainResult result{glorot_init(n, config.hidden_dim, config.latent_dim, init_rng), {}};
  if (config.epochs == 0) return result;

  Adam adam(config, result.params);
  Gradients grads;
  result.history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng noise_rng(Rng::derive(config.seed, epoch_stream(epoch)));
    const Matrix noise = sample_noise(n, config.latent_dim, noise_rng);
    const LossParts loss = objective.loss_and_grad(result.params, noise, grads);

    EpochRecord rec{epoch, loss.bce, loss.kl, loss.total, std::nullopt};
    if (!std::isfinite(loss.total) || !all_finite(grads.w_shared) || !all_finite(grads.w_mu) ||
        !all_finite(grads.w_logvar)) {
      std::ostringstream os;
      os << "training diverged at epoch " << epoch << " (total loss " << loss.total << ")";
      throw TrainingDiverged(os.str(), std::move(result.history));
    }
    const Encoding enc = encode(objective.features(), objective.norm_adj(), result.params);
    rec.val_auc = split_auc(enc.mu, split.val, split.neg_val);
    result.history.push_back(rec);

    adam.step(result.params, grads);
  }
  return result;
}

GradientCheckReport gradient_check(const VgaeParams& params, const StateGraph& graph, const EdgeSplit& split,
                                   const TrainConfig& config, double epsilon) {
  require(epsilon >= 1e-7 && epsilon <= 1e-3, Errc::Config, "gradient check epsilon must lie in [1e-7, 1e-3]");
  const std::size_t n = graph.node_count();
  const VgaeObjective objective(identity_features(graph), graph.adjacency(split.train), config.kl_weight);

  Rng rng(Rng::derive(config.seed, kGradCheckStream));
  const Matrix noise = sample_noise(n, params.latent(), rng);

  Gradients analytic;
  objective.loss_and_grad(params, noise, analytic);

  // (matrix id, flat index) over all three weight matrices.
  std::vector<std::pair<int, std::size_t>> entries;
  for (std::size_t k = 0; k < params.w_shared.size(); ++k) entries.emplace_back(0, k);
  for (std::size_t k = 0; k < params.w_mu.size(); ++k) entries.emplace_back(1, k);
  for (std::size_t k = 0; k < params.w_logvar.size(); ++k) entries.emplace_back(2, k);
  constexpr std::size_t kMinEntries = 64;
  if (entries.size() > kMinEntries) {
    rng.shuffle(entries);
    entries.resize(kMinEntries);
  }

  auto pick = [](auto& p, int which) -> auto& {
    return which == 0 ? p.w_shared : (which == 1 ? p.w_mu : p.w_logvar);
  };

  GradientCheckReport report;
  VgaeParams probe = params;
  for (const auto& [which, k] : entries) {
    double& w = pick(probe, which).data()[k];
    const double saved = w;
    w = saved + epsilon;
    const double up = objective.loss(probe, noise).total;
    w = saved - epsilon;
    const double down = objective.loss(probe, noise).total;
    w = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double exact = pick(analytic, which).data()[k];
    const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-6});
    report.max_relative_error = std::max(report.max_relative_error, std::abs(exact - numeric) / denom);
    ++report.entries_checked;
  }
  return report;
}

namespace {

nlohmann::ordered_json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<double>>();
  require(data.size() == m.size(), Errc::Checkpoint, "checkpoint matrix data length does not match its shape");
  m.data() = std::move(data);
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt,
                     const nlohmann::ordered_json& provenance) {
  nlohmann::ordered_json j;
  j["format"] = "freedst-vgae-checkpoint";
  j["version"] = kCheckpointVersion;
  j["node_count"] = ckpt.node_count;
  j["dims"] = {{"features", ckpt.params.n_features()},
               {"hidden", ckpt.params.hidden()},
               {"latent", ckpt.params.latent()}};
  j["seed"] = ckpt.config.seed;
  j["config"] = to_json(ckpt.config);
  j["provenance"] = provenance;
  j["w_shared"] = matrix_json(ckpt.params.w_shared);
  j["w_mu"] = matrix_json(ckpt.params.w_mu);
  j["w_logvar"] = matrix_json(ckpt.params.w_logvar);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error(Errc::IoError, "write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot read checkpoint " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    require(j.at("format").get<std::string>() == "freedst-vgae-checkpoint", Errc::Checkpoint,
            path.string() + " is not a VGAE checkpoint");
    const int version = j.at("version").get<int>();
    require(version == kCheckpointVersion, Errc::Checkpoint,
            "unsupported checkpoint version " + std::to_string(version));
    Checkpoint c;
    c.node_count = j.at("node_count").get<std::size_t>();
    c.config = train_config_from_json(j.at("config"));
    c.params.w_shared = matrix_from_json(j.at("w_shared"));
    c.params.w_mu = matrix_from_json(j.at("w_mu"));
    c.params.w_logvar = matrix_from_json(j.at("w_logvar"));
    const auto& dims = j.at("dims");
    require(dims.at("features").get<std::size_t>() == c.params.n_features() &&
                dims.at("hidden").get<std::size_t>() == c.params.hidden() &&
                dims.at("latent").get<std::size_t>() == c.params.latent() &&
                c.params.w_mu.rows() == c.params.hidden() && c.params.w_logvar.rows() == c.params.hidden() &&
                c.params.w_logvar.cols() == c.params.latent(),
            Errc::Checkpoint, "checkpoint dimensions are inconsistent");
    for (const Matrix* m : {&c.params.w_shared, &c.params.w_mu, &c.params.w_logvar}) {
      require(all_finite(*m), Errc::Checkpoint, "checkpoint contains non-finite weights");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Checkpoint, path.string() + ": " + e.what());
  }
}

}  // namespace freedst
