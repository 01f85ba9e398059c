#include "freedst/prompt_engine.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "freedst/error.hpp"

namespace freedst {

namespace {

const std::array<std::string, 3>& builtin_personas() {
  static const std::array<std::string, 3> personas = {
      "You are an advanced dialogue state tracker with expertise in understanding and managing complex "
      "conversations to maintain context and provide accurate responses.",
      "You are a context-aware dialogue specialist, skilled in recognizing user intents and maintaining "
      "seamless conversation flow by accurately tracking dialogue states.",
      "You are an expert conversational analyst, proficient in monitoring and updating dialogue states to "
      "ensure coherent and contextually appropriate interactions.",
  };
  return personas;
}

const std::string kFrame =
    "Below is an instruction that describes a task, paired with an input that provides further context. "
    "Write a response that appropriately completes the request. Ensure that the response is clear, concise, "
    "and directly addresses the task described in the instruction. Avoid asking for personal information or "
    "making assumptions beyond the provided context.";

const std::string kStepCue = "Let's step by step.";

const std::string kSelfDiscover =
    "Before answering, select the reasoning modules that suit this task and adapt them to the conversation. "
    "Compose them into an explicit reasoning structure, then follow that structure to reach the answer.";

const std::string kTreeOfThought =
    "Consider several candidate interpretations of what the user wants. Evaluate each candidate against the "
    "input and keep only the interpretation that the conversation supports best before answering.";

const std::string kInstruction =
    "Track the dialogue state of the conversation in the input. For every topic the user talks about, identify "
    "the domain, list each slot the user refers to, and give the value the user states for that slot. Use "
    "the user's own words for values. Answer in the format "
    "Domain : ['<domain>'] , Slot : ['<slot 1>', '<slot 2>'] , Value : ['<value 1>', '<value 2>'] "
    "with exactly one value per slot, in the same order as the slots.";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string* section_slot(PromptTemplates& t, std::string_view name) {
  if (name == "persona1") return &t.personas[0];
  if (name == "persona2") return &t.personas[1];
  if (name == "persona3") return &t.personas[2];
  if (name == "frame") return &t.frame;
  if (name == "step_cue") return &t.step_cue;
  if (name == "self_discover") return &t.self_discover;
  if (name == "tree_of_thought") return &t.tree_of_thought;
  if (name == "instruction") return &t.instruction;
  return nullptr;
}

}  // namespace

std::string_view strategy_name(PromptStrategy s) {
  switch (s) {
    case PromptStrategy::CoT: return "cot";
    case PromptStrategy::CoTPersona1: return "cot-persona1";
    case PromptStrategy::CoTPersona2: return "cot-persona2";
    case PromptStrategy::CoTPersona3: return "cot-persona3";
    case PromptStrategy::SelfDiscover: return "self-discover";
    case PromptStrategy::ToT: return "tot";
  }
  return "cot";
}

PromptStrategy parse_strategy(std::string_view name) {
  for (auto s : {PromptStrategy::CoT, PromptStrategy::CoTPersona1, PromptStrategy::CoTPersona2,
                 PromptStrategy::CoTPersona3, PromptStrategy::SelfDiscover, PromptStrategy::ToT}) {
    if (strategy_name(s) == name) return s;
  }
  throw Error(Errc::Config, "unknown prompt strategy '" + std::string(name) + "'");
}

bool is_persona(PromptStrategy s) {
  return s == PromptStrategy::CoTPersona1 || s == PromptStrategy::CoTPersona2 || s == PromptStrategy::CoTPersona3;
}

bool is_cot_family(PromptStrategy s) { return s == PromptStrategy::CoT || is_persona(s); }

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.personas = builtin_personas();
  t.frame = kFrame;
  t.step_cue = kStepCue;
  t.self_discover = kSelfDiscover;
  t.tree_of_thought = kTreeOfThought;
  t.instruction = kInstruction;
  return t;
}

PromptTemplates parse_template_overrides(std::string_view text, const PromptTemplates& base) {
  PromptTemplates out = base;
  std::string* current = nullptr;
  std::string body;
  auto flush = [&] {
    if (current) *current = trim(body);
    body.clear();
  };

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (!t.empty() && t.front() == '#') continue;
    if (t.size() > 2 && t.front() == '[' && t.back() == ']') {
      flush();
      const std::string name = t.substr(1, t.size() - 2);
      current = section_slot(out, name);
      if (!current) {
        throw Error(Errc::TemplateFormat,
                    "unknown template section [" + name + "] at line " + std::to_string(lineno));
      }
      continue;
    }
    if (!current) {
      if (t.empty()) continue;
      throw Error(Errc::TemplateFormat, "text outside a section at line " + std::to_string(lineno));
    }
    if (!body.empty()) body.push_back('\n');
    body += line;
  }
  flush();
  return out;
}

PromptTemplates load_template_overrides(const std::filesystem::path& path, const PromptTemplates& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot read template file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_template_overrides(ss.str(), base);
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot read exemplar file " + path.string());
  std::vector<Exemplar> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("input").get<std::string>(), j.at("output").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Config, path.string() + ":" + std::to_string(lineno) + ": bad exemplar record: " + e.what());
    }
  }
  return out;
}

std::string build_prompt(const PromptSpec& spec) {
  if (trim(spec.instruction).empty()) throw Error(Errc::EmptyInstruction, "prompt instruction is empty");
  if (trim(spec.input_text).empty()) throw Error(Errc::EmptyInput, "prompt input is empty");

  const PromptTemplates& t = spec.templates;
  std::vector<std::string_view> parts;
  if (is_persona(spec.strategy)) {
    parts.push_back(t.personas[static_cast<std::size_t>(spec.strategy) -
                               static_cast<std::size_t>(PromptStrategy::CoTPersona1)]);
  }
  parts.push_back(t.frame);
  switch (spec.strategy) {
    case PromptStrategy::SelfDiscover: parts.push_back(t.self_discover); break;
    case PromptStrategy::ToT: parts.push_back(t.tree_of_thought); break;
    default: parts.push_back(t.step_cue); break;
  }
  if (spec.anti_hallucination) parts.push_back(kAntiHallucinationClause);

  std::string out;
  for (auto p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  for (std::size_t i = 0; i < spec.exemplars.size(); ++i) {
    out += " Example " + std::to_string(i + 1) + ": Input: " + spec.exemplars[i].input_text +
           " Response: " + spec.exemplars[i].expected_output;
  }
  out += " Instruction: " + spec.instruction + " Input: " + spec.input_text + " Response:";
  return out;
}

std::vector<std::string> prompt_warnings(const PromptSpec& spec) {
  std::vector<std::string> out;
  const auto n = spec.exemplars.size();
  if (n == 1 || n > 4) {
    out.push_back(std::to_string(n) + " exemplars; evaluated configurations use 0, 2, 3 or 4");
  }
  return out;
}

const std::string& persona_text(PromptStrategy kind) {
  if (!is_persona(kind)) {
    throw Error(Errc::NonPersonaKind, "strategy '" + std::string(strategy_name(kind)) + "' has no persona");
  }
  return builtin_personas()[static_cast<std::size_t>(kind) - static_cast<std::size_t>(PromptStrategy::CoTPersona1)];
}

const std::string& default_instruction() { return kInstruction; }

}  // namespace freedst
