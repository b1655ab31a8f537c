#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "stoic/dataset.hpp"

namespace stoic {

/// Symbol -> category table. Categories are 1..C; 0 is reserved for padding.
class EncodingMap {
 public:
  EncodingMap(std::string name, std::array<int, 26> category_of_letter, std::vector<std::string> category_names);

  const std::string& name() const { return name_; }
  int categories() const { return static_cast<int>(category_names_.size()); }
  /// Category for a residue symbol, or 0 for kPad.
  int category(char symbol) const;
  const std::string& category_name(int category) const { return category_names_.at(category - 1); }
  /// True when every category holds exactly one symbol.
  bool bijective() const;
  /// Inverse lookup for bijective maps; kPad for category 0.
  char symbol_of(int category) const;

 private:
  std::string name_;
  std::array<int, 26> category_of_letter_;
  std::vector<std::string> category_names_;
};

/// 25 symbols mapped bijectively to 1..25 in alphabetical order.
const EncodingMap& charprotset_map();
/// Six side-chain chemistry groups.
const EncodingMap& cluster_map();
/// Lookup by "charprotset" / "clusters"; throws BadConfig otherwise.
const EncodingMap& encoding_map_by_name(const std::string& name);

enum class EncodingMethod { IntegerLabel, OneHot };

std::string to_string(EncodingMethod method);
EncodingMethod encoding_method_from_string(const std::string& s);

struct FeatureLayout {
  std::size_t positions = 0;
  std::size_t channels = 1;
  std::string map_name;
  EncodingMethod method = EncodingMethod::OneHot;

  std::size_t features() const { return positions * channels; }
  std::size_t feature_of(std::size_t position, std::size_t channel) const { return position * channels + channel; }
  std::size_t position_of(std::size_t feature) const { return feature / channels; }
  std::size_t channel_of(std::size_t feature) const { return feature % channels; }

  bool operator==(const FeatureLayout&) const = default;
};

FeatureLayout make_layout(std::size_t positions, const EncodingMap& map, EncodingMethod method);

/// Dense samples x features matrix with row metadata.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  FeatureLayout layout;
  std::vector<std::string> row_ids;
  Eigen::VectorXd targets;  // +1 OneEighty, -1 Sixty

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::vector<StoichiometryClass> labels() const;
  FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const;
};

FeatureMatrix encode(const StoichiometryDataset& dataset, const EncodingMap& map, EncodingMethod method);

/// Per-position categories of one encoded row (0 for padding). Throws
/// LayoutMismatch if a OneHot block holds more than one set channel.
std::vector<int> decode_categories(const FeatureMatrix& x, std::size_t row);

std::string feature_matrix_csv(const FeatureMatrix& x);
std::string layout_json(const FeatureLayout& layout);

}  // namespace stoic
