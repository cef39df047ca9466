#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dualre/types.hpp"

namespace dualre {

enum class DataFormat { kTacredJson, kTabular };

DataFormat parse_format(const std::string& name);
std::string format_name(DataFormat format);

// Reads a labeled dataset. The schema is inferred as the sorted union of
// observed labels, with no_relation appended when absent. Parse failures
// name the offending record; invalid spans name the mention id.
std::pair<RelationSchema, std::vector<LabeledExample>> read_dataset(
    const std::string& path, DataFormat format);

// Writes a labeled dataset in the given format. Reading the result back
// reproduces token sequences, spans and labels exactly.
void write_dataset(const std::string& path, DataFormat format,
                   const RelationSchema& schema,
                   const std::vector<LabeledExample>& examples);

// Unlabeled pool files use the same formats with an empty relation field.
std::vector<RelationMention> read_mentions(const std::string& path, DataFormat format);
void write_mentions(const std::string& path, DataFormat format,
                    const std::vector<RelationMention>& mentions);

// Sealed ground truth of an unlabeled pool: tab-separated id and label.
SealedTruth read_sealed_truth(const std::string& path, const RelationSchema& schema);
void write_sealed_truth(const std::string& path, const RelationSchema& schema,
                        const SealedTruth& truth);

// Rewrites label indices from their source schema to the target schema by
// label name. Throws when a name is missing from the target.
void remap_labels(const RelationSchema& source, const RelationSchema& target,
                  std::vector<LabeledExample>& examples);

}  // namespace dualre
