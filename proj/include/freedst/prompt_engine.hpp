#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace freedst {

enum class PromptStrategy { CoT, CoTPersona1, CoTPersona2, CoTPersona3, SelfDiscover, ToT };

std::string_view strategy_name(PromptStrategy s);  // "cot", "cot-persona1", ..., "self-discover", "tot"
PromptStrategy parse_strategy(std::string_view name);  // throws Errc::Config
bool is_persona(PromptStrategy s);
bool is_cot_family(PromptStrategy s);

inline constexpr std::string_view kAntiHallucinationClause =
    "If the value does not exist, return the value as NONE.";

/// Version tag of the built-in instruction text; bump when default_instruction() changes.
inline constexpr std::string_view kInstructionVersion = "v1";

/// Replaceable prompt fragments. Defaults hold the published persona and frame texts.
struct PromptTemplates {
  std::array<std::string, 3> personas;
  std::string frame;
  std::string step_cue;
  std::string self_discover;
  std::string tree_of_thought;
  std::string instruction;

  static PromptTemplates defaults();
};

/// Loads a UTF-8 override file of named sections:
///
///   # comment
///   [persona2]
///   You are ...
///   [instruction]
///   ...
///
/// Known sections: persona1 persona2 persona3 frame step_cue self_discover
/// tree_of_thought instruction. Sections absent from the file keep `base`.
/// Throws Errc::TemplateFormat on unknown sections or text outside a section.
PromptTemplates load_template_overrides(const std::filesystem::path& path,
                                        const PromptTemplates& base = PromptTemplates::defaults());
PromptTemplates parse_template_overrides(std::string_view text,
                                         const PromptTemplates& base = PromptTemplates::defaults());

struct Exemplar {
  std::string input_text;
  std::string expected_output;
};

/// JSONL file of {"input": ..., "output": ...} records.
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);

struct PromptSpec {
  PromptStrategy strategy = PromptStrategy::CoTPersona2;
  std::string instruction;
  std::string input_text;
  bool anti_hallucination = true;
  std::vector<Exemplar> exemplars;
  PromptTemplates templates = PromptTemplates::defaults();
};

/// Renders persona, frame, reasoning cue, optional anti-hallucination clause,
/// exemplars, then "Instruction: ... Input: ... Response:".
/// Throws Errc::EmptyInstruction / Errc::EmptyInput.
std::string build_prompt(const PromptSpec& spec);

/// Non-fatal configuration warnings (e.g. exemplar counts outside {0, 2, 3, 4}).
std::vector<std::string> prompt_warnings(const PromptSpec& spec);

/// Published persona sentence for CoTPersona1..3; throws Errc::NonPersonaKind otherwise.
const std::string& persona_text(PromptStrategy kind);

/// The toolkit's instruction. Asks for Domain/Slot/Value lists and names no slot vocabulary.
const std::string& default_instruction();

}  // namespace freedst
