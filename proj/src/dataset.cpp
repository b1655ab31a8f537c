#include "stoic/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "stoic/rng.hpp"

namespace stoic {

bool is_residue_symbol(char c) { return c >= 'A' && c <= 'Z' && c != 'J'; }

StoichiometryDataset::StoichiometryDataset(std::vector<ProteinRecord> records, std::size_t max_length)
    : records_(std::move(records)), max_length_(max_length) {
  if (records_.empty()) throw Error(ErrorCode::EmptyFile, "dataset has no records");
  if (max_length_ == 0) throw Error(ErrorCode::BadConfig, "max_length must be positive");
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> sequences;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.id.empty()) throw Error(ErrorCode::MalformedCsv, "record " + std::to_string(i) + " has empty id");
    if (r.sequence.empty())
      throw Error(ErrorCode::BadSymbol, "record '" + r.id + "' has an empty sequence");
    for (std::size_t col = 0; col < r.sequence.size(); ++col) {
      if (!is_residue_symbol(r.sequence[col]))
        throw Error(ErrorCode::BadSymbol, "record '" + r.id + "' column " + std::to_string(col + 1) +
                                              ": '" + std::string(1, r.sequence[col]) + "'");
    }
    if (!ids.insert(r.id).second) throw Error(ErrorCode::DuplicateId, r.id);
    if (!sequences.insert(r.sequence).second)
      throw Error(ErrorCode::DuplicateSequence, "record '" + r.id + "' repeats an earlier sequence");
  }
}

std::size_t StoichiometryDataset::count(StoichiometryClass c) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [c](const auto& r) { return r.label == c; }));
}

std::size_t StoichiometryDataset::longest_sequence() const {
  std::size_t longest = 0;
  for (const auto& r : records_) longest = std::max(longest, r.sequence.size());
  return longest;
}

StoichiometryDataset StoichiometryDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<ProteinRecord> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(records_.at(i));
  return StoichiometryDataset(std::move(out), max_length_);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

StoichiometryDataset parse_dataset(std::string_view csv_text, std::size_t max_length) {
  std::vector<ProteinRecord> records;
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> sequences;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= csv_text.size()) {
    const auto nl = csv_text.find('\n', pos);
    auto line = csv_text.substr(pos, nl == std::string_view::npos ? csv_text.npos : nl - pos);
    pos = nl == std::string_view::npos ? csv_text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "id" || fields[1] != "sequence" || fields[2] != "stoichiometry")
        throw Error(ErrorCode::MalformedCsv, "expected header 'id,sequence,stoichiometry'");
      header_seen = true;
      continue;
    }
    const std::string where = "row " + std::to_string(line_no);
    if (fields.size() != 3) throw Error(ErrorCode::MalformedCsv, where + ": expected 3 fields");

    ProteinRecord rec;
    rec.id = std::string(fields[0]);
    if (rec.id.empty()) throw Error(ErrorCode::MalformedCsv, where + ": empty id");
    if (fields[2] == "60") {
      rec.label = StoichiometryClass::Sixty;
    } else if (fields[2] == "180") {
      rec.label = StoichiometryClass::OneEighty;
    } else {
      throw Error(ErrorCode::BadLabel, where + ": stoichiometry '" + std::string(fields[2]) + "'");
    }
    rec.sequence.reserve(fields[1].size());
    for (std::size_t col = 0; col < fields[1].size(); ++col) {
      const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(fields[1][col])));
      if (!is_residue_symbol(c))
        throw Error(ErrorCode::BadSymbol, where + " column " + std::to_string(col + 1) + ": '" +
                                              std::string(1, fields[1][col]) + "'");
      rec.sequence.push_back(c);
    }
    if (rec.sequence.empty()) throw Error(ErrorCode::BadSymbol, where + ": empty sequence");
    if (!ids.insert(rec.id).second) throw Error(ErrorCode::DuplicateId, where + ": " + rec.id);
    if (!sequences.insert(rec.sequence).second)
      throw Error(ErrorCode::DuplicateSequence, where + ": '" + rec.id + "' repeats an earlier sequence");
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw Error(ErrorCode::EmptyFile, header_seen ? "no data rows" : "no content");
  if (max_length == 0) {
    for (const auto& r : records) max_length = std::max(max_length, r.sequence.size());
  }
  return StoichiometryDataset(std::move(records), max_length);
}

StoichiometryDataset load_dataset(const std::string& path, std::size_t max_length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), max_length);
}

std::string to_csv(const StoichiometryDataset& dataset) {
  std::string out = "id,sequence,stoichiometry\n";
  for (const auto& r : dataset.records()) {
    out += r.id;
    out += ',';
    out += r.sequence;
    out += ',';
    out += std::to_string(chain_count_of(r.label));
    out += '\n';
  }
  return out;
}

std::string to_json(const StoichiometryDataset& dataset) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : dataset.records())
    arr.push_back({{"id", r.id}, {"sequence", r.sequence}, {"stoichiometry", chain_count_of(r.label)}});
  return arr.dump(2) + "\n";
}

std::string pad_or_truncate(std::string_view sequence, std::size_t m) {
  std::string tokens(m, kPad);
  std::copy_n(sequence.begin(), std::min(m, sequence.size()), tokens.begin());
  return tokens;
}

std::size_t length_bin(std::size_t length) {
  if (length <= 200) return 0;
  if (length <= 400) return 1;
  if (length <= 600) return 2;
  return 3;
}

LengthHistogram length_histogram(const StoichiometryDataset& dataset) {
  LengthHistogram h;
  for (const auto& r : dataset.records()) {
    auto& bins = r.label == StoichiometryClass::Sixty ? h.sixty : h.one_eighty;
    ++bins[length_bin(r.sequence.size())];
  }
  return h;
}

std::string format_histogram(const LengthHistogram& h) {
  auto total = [](const LengthBins& b) { return std::accumulate(b.begin(), b.end(), std::size_t{0}); };
  std::ostringstream os;
  os << "class    count  <=200  200-400  400-600  >600\n";
  auto row = [&](const char* name, const LengthBins& b) {
    char line[96];
    std::snprintf(line, sizeof line, "%-7s  %5zu  %5zu  %7zu  %7zu  %4zu\n", name, total(b), b[0], b[1], b[2], b[3]);
    os << line;
  };
  row("60-mer", h.sixty);
  row("180-mer", h.one_eighty);
  return os.str();
}

std::vector<std::size_t> FoldAssignment::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

FoldAssignment stratified_folds(const std::vector<StoichiometryClass>& labels, std::size_t k,
                                std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::TooFewSamples, "fold count must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i] == StoichiometryClass::OneEighty ? 1 : 0].push_back(i);
  for (const auto& members : by_class) {
    if (members.size() < k)
      throw Error(ErrorCode::TooFewSamples, "a class has " + std::to_string(members.size()) +
                                                " members, fewer than " + std::to_string(k) + " folds");
  }

  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.fold_of.assign(labels.size(), 0);
  Rng rng(seed);
  std::size_t next_fold = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (auto idx : members) {
      out.fold_of[idx] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return out;
}

FoldAssignment stratified_folds(const StoichiometryDataset& dataset, std::size_t k, std::uint64_t seed) {
  std::vector<StoichiometryClass> labels;
  labels.reserve(dataset.size());
  for (const auto& r : dataset.records()) labels.push_back(r.label);
  return stratified_folds(labels, k, seed);
}

}  // namespace stoic
