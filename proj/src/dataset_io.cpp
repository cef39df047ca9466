#include "dualre/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace dualre {
namespace {

using nlohmann::json;

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

int parse_int_field(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

// One record per line: id, space-joined tokens, four span ints, label.
// An empty label marks an unlabeled mention.
std::pair<RelationMention, std::string> parse_tabular_line(const std::string& line, int line_no) {
  auto fields = split_on(line, '\t');
  if (fields.size() != 7)
    throw std::runtime_error("line " + std::to_string(line_no) + ": expected 7 tab-separated fields, got " +
                             std::to_string(fields.size()));
  RelationMention m;
  m.id = fields[0];
  std::istringstream toks(fields[1]);
  std::string tok;
  while (toks >> tok) m.tokens.push_back(tok);
  m.subj_span = {parse_int_field(fields[2], line_no, "subj_start"),
                 parse_int_field(fields[3], line_no, "subj_end")};
  m.obj_span = {parse_int_field(fields[4], line_no, "obj_start"),
                parse_int_field(fields[5], line_no, "obj_end")};
  validate_mention(m);
  return {std::move(m), fields[6]};
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

void write_tabular_line(std::ostream& out, const RelationMention& m, const std::string& label) {
  out << m.id << '\t' << join_tokens(m.tokens) << '\t' << m.subj_span.first << '\t'
      << m.subj_span.second << '\t' << m.obj_span.first << '\t' << m.obj_span.second << '\t'
      << label << '\n';
}

std::pair<RelationMention, std::string> parse_tacred_record(const json& rec, std::size_t idx) {
  if (!rec.is_object())
    throw std::runtime_error("record " + std::to_string(idx) + ": not a JSON object");
  auto require = [&](const char* key) -> const json& {
    auto it = rec.find(key);
    if (it == rec.end())
      throw std::runtime_error("record " + std::to_string(idx) + ": missing key '" + key + "'");
    return *it;
  };
  RelationMention m;
  m.id = require("id").get<std::string>();
  for (const auto& t : require("token")) m.tokens.push_back(t.get<std::string>());
  m.subj_span = {require("subj_start").get<int>(), require("subj_end").get<int>()};
  m.obj_span = {require("obj_start").get<int>(), require("obj_end").get<int>()};
  if (rec.contains("subj_type") && !rec["subj_type"].is_null())
    m.subj_type = rec["subj_type"].get<std::string>();
  if (rec.contains("obj_type") && !rec["obj_type"].is_null())
    m.obj_type = rec["obj_type"].get<std::string>();
  if (rec.contains("stanford_pos") && !rec["stanford_pos"].is_null())
    m.pos_tags = rec["stanford_pos"].get<std::vector<std::string>>();
  if (rec.contains("stanford_ner") && !rec["stanford_ner"].is_null())
    m.ner_tags = rec["stanford_ner"].get<std::vector<std::string>>();
  validate_mention(m);
  std::string label = require("relation").is_null() ? "" : require("relation").get<std::string>();
  return {std::move(m), std::move(label)};
}

json tacred_record(const RelationMention& m, const std::string& label) {
  json rec;
  rec["id"] = m.id;
  rec["token"] = m.tokens;
  rec["subj_start"] = m.subj_span.first;
  rec["subj_end"] = m.subj_span.second;
  rec["obj_start"] = m.obj_span.first;
  rec["obj_end"] = m.obj_span.second;
  rec["subj_type"] = m.subj_type ? json(*m.subj_type) : json(nullptr);
  rec["obj_type"] = m.obj_type ? json(*m.obj_type) : json(nullptr);
  if (m.pos_tags) rec["stanford_pos"] = *m.pos_tags;
  if (m.ner_tags) rec["stanford_ner"] = *m.ner_tags;
  rec["relation"] = label;
  return rec;
}

std::vector<std::pair<RelationMention, std::string>> read_records(const std::string& path,
                                                                  DataFormat format) {
  auto in = open_for_read(path);
  std::vector<std::pair<RelationMention, std::string>> records;
  if (format == DataFormat::kTabular) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      records.push_back(parse_tabular_line(line, line_no));
    }
  } else {
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw std::runtime_error("'" + path + "': JSON parse failure: " + e.what());
    }
    if (!doc.is_array()) throw std::runtime_error("'" + path + "': expected a top-level JSON array");
    for (std::size_t i = 0; i < doc.size(); ++i) records.push_back(parse_tacred_record(doc[i], i));
  }
  if (records.empty()) throw std::runtime_error("'" + path + "': no records");
  return records;
}

void write_records(const std::string& path, DataFormat format,
                   const std::vector<std::pair<const RelationMention*, std::string>>& records) {
  auto out = open_for_write(path);
  if (format == DataFormat::kTabular) {
    for (const auto& [m, label] : records) write_tabular_line(out, *m, label);
  } else {
    json doc = json::array();
    for (const auto& [m, label] : records) doc.push_back(tacred_record(*m, label));
    out << doc.dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

DataFormat parse_format(const std::string& name) {
  if (name == "tacred_json") return DataFormat::kTacredJson;
  if (name == "tabular") return DataFormat::kTabular;
  throw std::invalid_argument("unknown data format '" + name + "'");
}

std::string format_name(DataFormat format) {
  return format == DataFormat::kTacredJson ? "tacred_json" : "tabular";
}

std::pair<RelationSchema, std::vector<LabeledExample>> read_dataset(const std::string& path,
                                                                    DataFormat format) {
  auto records = read_records(path, format);
  std::vector<std::string> observed;
  for (const auto& [m, label] : records) {
    if (label.empty())
      throw std::runtime_error("mention '" + m.id + "': missing relation label in labeled dataset");
    observed.push_back(label);
  }
  RelationSchema schema = RelationSchema::from_observed(std::move(observed));
  std::vector<LabeledExample> examples;
  examples.reserve(records.size());
  for (auto& [m, label] : records)
    examples.push_back(LabeledExample{std::move(m), schema.index_of(label)});
  return {std::move(schema), std::move(examples)};
}

void write_dataset(const std::string& path, DataFormat format, const RelationSchema& schema,
                   const std::vector<LabeledExample>& examples) {
  std::vector<std::pair<const RelationMention*, std::string>> records;
  records.reserve(examples.size());
  for (const auto& e : examples) records.emplace_back(&e.mention, schema.label(e.label));
  write_records(path, format, records);
}

std::vector<RelationMention> read_mentions(const std::string& path, DataFormat format) {
  auto records = read_records(path, format);
  std::vector<RelationMention> mentions;
  mentions.reserve(records.size());
  for (auto& [m, label] : records) mentions.push_back(std::move(m));
  return mentions;
}

void write_mentions(const std::string& path, DataFormat format,
                    const std::vector<RelationMention>& mentions) {
  std::vector<std::pair<const RelationMention*, std::string>> records;
  records.reserve(mentions.size());
  for (const auto& m : mentions) records.emplace_back(&m, "");
  write_records(path, format, records);
}

SealedTruth read_sealed_truth(const std::string& path, const RelationSchema& schema) {
  auto in = open_for_read(path);
  std::unordered_map<std::string, int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_on(line, '\t');
    if (fields.size() != 2)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 'id<TAB>label'");
    int idx = schema.index_of(fields[1]);
    if (idx < 0)
      throw std::runtime_error("line " + std::to_string(line_no) + ": unknown label '" + fields[1] + "'");
    labels[fields[0]] = idx;
  }
  return SealedTruth(std::move(labels));
}

void write_sealed_truth(const std::string& path, const RelationSchema& schema,
                        const SealedTruth& truth) {
  auto out = open_for_write(path);
  std::map<std::string, int> ordered(truth.unseal().begin(), truth.unseal().end());
  for (const auto& [id, label] : ordered) out << id << '\t' << schema.label(label) << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void remap_labels(const RelationSchema& source, const RelationSchema& target,
                  std::vector<LabeledExample>& examples) {
  std::vector<int> mapping(source.size());
  for (int i = 0; i < source.size(); ++i) {
    mapping[i] = target.index_of(source.label(i));
    if (mapping[i] < 0)
      throw std::runtime_error("label '" + source.label(i) + "' is not in the target schema");
  }
  for (auto& ex : examples) ex.label = mapping.at(ex.label);
}

}  // namespace dualre
