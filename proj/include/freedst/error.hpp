#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace freedst {

enum class Errc {
  // dialogue_model / prompt_engine
  EmptyUtterance,
  EmptyInstruction,
  EmptyInput,
  NonPersonaKind,
  TemplateFormat,
  // llm_backend
  NetworkTimeout,
  RateLimited,
  MalformedResponse,
  ReplayMiss,
  StorageIo,
  BackendConfig,
  // metrics
  EmptySequence,
  NoGoldSlots,
  // state_graph
  TooFewEdges,
  BadFractions,
  InsufficientNegatives,
  // vgae
  NonSquare,
  DimensionMismatch,
  IndexOutOfRange,
  EmptyTrainSet,
  Diverged,
  Checkpoint,
  // link_eval
  DegenerateLabels,
  NoPositives,
  EmptyContext,
  // dataset_io
  UnreadableFile,
  UnknownFormat,
  ZeroValidDialogues,
  IoError,
  TooFewItems,
  // cli
  IdMismatch,
  Config,
};

std::string_view errc_name(Errc code);

/// True for failures that originate upstream of the toolkit (model endpoint, replay fixtures).
bool is_backend_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace freedst
