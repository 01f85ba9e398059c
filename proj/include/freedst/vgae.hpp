#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "freedst/error.hpp"
#include "freedst/matrix.hpp"
#include "freedst/state_graph.hpp"

namespace freedst {

/// Encoder weights: shared GCN layer, then mean and log-variance GCN heads.
struct VgaeParams {
  Matrix w_shared;  // n_features x hidden
  Matrix w_mu;      // hidden x latent
  Matrix w_logvar;  // hidden x latent

  std::size_t n_features() const { return w_shared.rows(); }
  std::size_t hidden() const { return w_shared.cols(); }
  std::size_t latent() const { return w_mu.cols(); }

  static VgaeParams zeros(std::size_t n_features, std::size_t hidden, std::size_t latent);

  friend bool operator==(const VgaeParams&, const VgaeParams&) = default;
};

struct TrainConfig {
  std::size_t hidden_dim = 32;
  std::size_t latent_dim = 16;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  double kl_weight = 1.0;
  std::uint64_t seed = 42;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  /// Throws Errc::Config when a positive field is not positive.
  void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochRecord {
  std::size_t epoch = 0;
  double bce = 0.0;
  double kl = 0.0;
  double total = 0.0;
  std::optional<double> val_auc;
};

using TrainHistory = std::vector<EpochRecord>;

struct Encoding {
  Matrix mu;
  Matrix logvar;
};

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I. Throws Errc::NonSquare.
Matrix normalize_adjacency(const Matrix& adjacency);

/// h = relu(Â X W_shared); mu = Â h W_mu; logvar = Â h W_logvar. Throws Errc::DimensionMismatch.
Encoding encode(const Matrix& features, const Matrix& norm_adj, const VgaeParams& params);

/// Standard-normal matrix drawn row-major from `rng`.
Matrix sample_noise(std::size_t rows, std::size_t cols, Rng& rng);

/// Z = mu + exp(logvar / 2) * eps. Throws Errc::DimensionMismatch.
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, Rng& rng);
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& noise);

/// sigmoid(z_i . z_j). Throws Errc::IndexOutOfRange.
double decode_edge(const Matrix& z, std::size_t i, std::size_t j);

/// Mean over all ordered pairs of BCE(A_ij, sigmoid(z_i . z_j)), positive terms scaled by pos_weight.
double reconstruction_loss(const Matrix& adjacency, const Matrix& z, double pos_weight);

/// -0.5 * mean over nodes of sum_d (1 + logvar - mu^2 - exp(logvar)). Throws Errc::DimensionMismatch.
double kl_divergence(const Matrix& mu, const Matrix& logvar);

/// Ratio of zero to one entries of the adjacency (ordered pairs, diagonal included).
double default_pos_weight(const Matrix& adjacency);

struct LossParts {
  double bce = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

using Gradients = VgaeParams;

/// Negative ELBO of a fixed graph: BCE on the training adjacency plus kl_weight * KL.
class VgaeObjective {
 public:
  VgaeObjective(const Matrix& features, const Matrix& train_adjacency, double kl_weight);

  LossParts loss(const VgaeParams& params, const Matrix& noise) const;
  /// Loss and analytic gradients for the given frozen reparameterisation noise.
  LossParts loss_and_grad(const VgaeParams& params, const Matrix& noise, Gradients& grads) const;

  const Matrix& norm_adj() const { return norm_adj_; }
  const Matrix& features() const { return features_; }
  double pos_weight() const { return pos_weight_; }
  std::size_t node_count() const { return targets_.rows(); }

 private:
  Matrix features_;
  Matrix norm_adj_;
  Matrix ax_;  // Â X, constant across steps
  Matrix targets_;
  double pos_weight_ = 1.0;
  double kl_weight_ = 1.0;
};

/// Glorot-uniform initialisation from `rng`.
VgaeParams glorot_init(std::size_t n_features, std::size_t hidden, std::size_t latent, Rng& rng);

struct TrainResult {
  VgaeParams params;
  TrainHistory history;
};

/// Thrown when the objective becomes non-finite; carries the epochs completed so far.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, TrainHistory history)
      : Error(Errc::Diverged, what), history_(std::move(history)) {}
  const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

/// Adam on the negative ELBO over split.train (val/test edges masked out), one
/// full-graph step per epoch with per-epoch seeded noise. Deterministic in
/// (graph, split, config). Throws Errc::EmptyTrainSet, TrainingDiverged.
TrainResult train(const StateGraph& graph, const EdgeSplit& split, const TrainConfig& config);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
};

/// Central finite differences of the total loss against the analytic gradient on a
/// seeded random subset of at least 50 weight entries (all entries if fewer), noise
/// frozen. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradientCheckReport gradient_check(const VgaeParams& params, const StateGraph& graph, const EdgeSplit& split,
                                   const TrainConfig& config, double epsilon);

struct Checkpoint {
  VgaeParams params;
  TrainConfig config;
  std::size_t node_count = 0;
};

inline constexpr int kCheckpointVersion = 1;

/// JSON container with dimensions, config and row-major weights. `provenance` is stored verbatim.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt,
                     const nlohmann::ordered_json& provenance = nlohmann::ordered_json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace freedst
