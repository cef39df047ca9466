#pragma once

#include <string>

#include "dualre/predictor.hpp"
#include "dualre/retriever.hpp"
#include "dualre/types.hpp"
#include "dualre/vocab.hpp"

namespace dualre {

// Self-contained text checkpoints: header (dims, vocab hash), labels, vocab
// tokens, then parameter blocks written as %.17g so doubles round-trip
// exactly. Loading validates the header against the payload and throws
// std::runtime_error on any mismatch.

struct PredictorCheckpoint {
  RelationSchema schema;
  Vocabulary vocab;
  PredictorModel model;
};

struct RetrieverCheckpoint {
  RelationSchema schema;
  Vocabulary vocab;
  RetrieverModel model;
};

void save_predictor(const PredictorModel& model, const Vocabulary& vocab,
                    const RelationSchema& schema, const std::string& path);
PredictorCheckpoint load_predictor(const std::string& path);

void save_retriever(const RetrieverModel& model, const Vocabulary& vocab,
                    const RelationSchema& schema, const std::string& path);
RetrieverCheckpoint load_retriever(const std::string& path);

}  // namespace dualre
