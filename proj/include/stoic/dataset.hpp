#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stoic/error.hpp"

namespace stoic {

/// Assembly stoichiometry. Sixty is the negative class, OneEighty positive.
enum class StoichiometryClass { Sixty, OneEighty };

inline double target_of(StoichiometryClass c) { return c == StoichiometryClass::OneEighty ? 1.0 : -1.0; }
inline int chain_count_of(StoichiometryClass c) { return c == StoichiometryClass::OneEighty ? 180 : 60; }

/// The 25 accepted residue symbols: A-Z without J.
inline constexpr std::string_view kAlphabet = "ABCDEFGHIKLMNOPQRSTUVWXYZ";

/// Token emitted for positions beyond the end of a sequence.
inline constexpr char kPad = '\0';

bool is_residue_symbol(char c);

struct ProteinRecord {
  std::string id;
  std::string sequence;
  StoichiometryClass label;

  bool operator==(const ProteinRecord&) const = default;
};

/// Validated, immutable collection of records padded/truncated to `max_length`.
class StoichiometryDataset {
 public:
  /// Validates every invariant (non-empty ids and sequences, alphabet, unique
  /// ids, unique sequences); throws Error otherwise.
  StoichiometryDataset(std::vector<ProteinRecord> records, std::size_t max_length);

  const std::vector<ProteinRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::size_t max_length() const { return max_length_; }
  const ProteinRecord& operator[](std::size_t i) const { return records_[i]; }

  std::size_t count(StoichiometryClass c) const;
  std::size_t longest_sequence() const;

  /// Subset in the given index order.
  StoichiometryDataset subset(const std::vector<std::size_t>& indices) const;

  bool operator==(const StoichiometryDataset&) const = default;

 private:
  std::vector<ProteinRecord> records_;
  std::size_t max_length_;
};

/// Parses `id,sequence,stoichiometry` CSV text. Symbols are upper-cased.
/// Pass max_length = 0 to use the longest sequence in the file.
StoichiometryDataset parse_dataset(std::string_view csv_text, std::size_t max_length);
StoichiometryDataset load_dataset(const std::string& path, std::size_t max_length);

std::string to_csv(const StoichiometryDataset& dataset);
std::string to_json(const StoichiometryDataset& dataset);

/// Exactly `m` tokens; kPad past the end of the sequence.
std::string pad_or_truncate(std::string_view sequence, std::size_t m);

/// Counts per length bin: <=200, (200,400], (400,600], >600.
using LengthBins = std::array<std::size_t, 4>;

struct LengthHistogram {
  LengthBins sixty{};
  LengthBins one_eighty{};
};

std::size_t length_bin(std::size_t length);
LengthHistogram length_histogram(const StoichiometryDataset& dataset);
std::string format_histogram(const LengthHistogram& h);

struct FoldAssignment {
  std::vector<std::size_t> fold_of;  // one entry per record
  std::size_t k = 0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

/// Stratified k-fold split: each class is shuffled and dealt round-robin,
/// continuing the rotation across classes so fold sizes stay within one.
FoldAssignment stratified_folds(const std::vector<StoichiometryClass>& labels, std::size_t k,
                                std::uint64_t seed);
FoldAssignment stratified_folds(const StoichiometryDataset& dataset, std::size_t k, std::uint64_t seed);

}  // namespace stoic
