#include "stoic/encoding.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace stoic {

EncodingMap::EncodingMap(std::string name, std::array<int, 26> category_of_letter,
                         std::vector<std::string> category_names)
    : name_(std::move(name)), category_of_letter_(category_of_letter), category_names_(std::move(category_names)) {}

int EncodingMap::category(char symbol) const {
  if (symbol == kPad) return 0;
  if (!is_residue_symbol(symbol)) throw Error(ErrorCode::BadSymbol, std::string(1, symbol));
  return category_of_letter_[static_cast<std::size_t>(symbol - 'A')];
}

bool EncodingMap::bijective() const { return categories() == static_cast<int>(kAlphabet.size()); }

char EncodingMap::symbol_of(int category) const {
  if (category == 0) return kPad;
  for (char c : kAlphabet)
    if (this->category(c) == category) return c;
  throw Error(ErrorCode::LayoutMismatch, "no symbol for category " + std::to_string(category));
}

const EncodingMap& charprotset_map() {
  static const EncodingMap map = [] {
    std::array<int, 26> table{};
    std::vector<std::string> names;
    int next = 1;
    for (char c : kAlphabet) {
      table[static_cast<std::size_t>(c - 'A')] = next++;
      names.emplace_back(1, c);
    }
    return EncodingMap("charprotset", table, names);
  }();
  return map;
}

const EncodingMap& cluster_map() {
  static const EncodingMap map = [] {
    const std::array<std::pair<const char*, const char*>, 6> groups{{
        {"aliphatic", "GAVLI"},
        {"aromatic", "FYW"},
        {"neutral", "CMPSTNQ"},
        {"positive", "HKR"},
        {"negative", "DE"},
        {"special", "BXOUZ"},
    }};
    std::array<int, 26> table{};
    std::vector<std::string> names;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      names.emplace_back(groups[g].first);
      for (const char* p = groups[g].second; *p; ++p) table[static_cast<std::size_t>(*p - 'A')] = static_cast<int>(g) + 1;
    }
    return EncodingMap("clusters", table, names);
  }();
  return map;
}

const EncodingMap& encoding_map_by_name(const std::string& name) {
  if (name == "charprotset") return charprotset_map();
  if (name == "clusters") return cluster_map();
  throw Error(ErrorCode::BadConfig, "unknown encoding map '" + name + "' (expected charprotset|clusters)");
}

std::string to_string(EncodingMethod method) {
  return method == EncodingMethod::OneHot ? "onehot" : "integer";
}

EncodingMethod encoding_method_from_string(const std::string& s) {
  if (s == "onehot") return EncodingMethod::OneHot;
  if (s == "integer") return EncodingMethod::IntegerLabel;
  throw Error(ErrorCode::BadConfig, "unknown encoding method '" + s + "' (expected integer|onehot)");
}

FeatureLayout make_layout(std::size_t positions, const EncodingMap& map, EncodingMethod method) {
  FeatureLayout layout;
  layout.positions = positions;
  layout.channels = method == EncodingMethod::OneHot ? static_cast<std::size_t>(map.categories()) : 1;
  layout.map_name = map.name();
  layout.method = method;
  return layout;
}

std::vector<StoichiometryClass> FeatureMatrix::labels() const {
  std::vector<StoichiometryClass> out(rows());
  for (std::size_t i = 0; i < rows(); ++i)
    out[i] = targets[static_cast<Eigen::Index>(i)] > 0 ? StoichiometryClass::OneEighty : StoichiometryClass::Sixty;
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& rows_wanted) const {
  FeatureMatrix out;
  out.layout = layout;
  out.values.resize(static_cast<Eigen::Index>(rows_wanted.size()), values.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows_wanted.size()));
  out.row_ids.reserve(rows_wanted.size());
  for (std::size_t i = 0; i < rows_wanted.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows_wanted[i]);
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(src);
    out.targets[static_cast<Eigen::Index>(i)] = targets[src];
    out.row_ids.push_back(row_ids.at(rows_wanted[i]));
  }
  return out;
}

FeatureMatrix encode(const StoichiometryDataset& dataset, const EncodingMap& map, EncodingMethod method) {
  FeatureMatrix x;
  x.layout = make_layout(dataset.max_length(), map, method);
  const auto n = static_cast<Eigen::Index>(dataset.size());
  x.values = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(x.layout.features()));
  x.targets.resize(n);
  x.row_ids.reserve(dataset.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = dataset[static_cast<std::size_t>(i)];
    x.row_ids.push_back(rec.id);
    x.targets[i] = target_of(rec.label);
    const auto tokens = pad_or_truncate(rec.sequence, dataset.max_length());
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      const int cat = map.category(tokens[p]);
      if (cat == 0) continue;
      if (method == EncodingMethod::OneHot) {
        x.values(i, static_cast<Eigen::Index>(x.layout.feature_of(p, static_cast<std::size_t>(cat - 1)))) = 1.0;
      } else {
        x.values(i, static_cast<Eigen::Index>(p)) = cat;
      }
    }
  }
  return x;
}

std::vector<int> decode_categories(const FeatureMatrix& x, std::size_t row) {
  const auto& layout = x.layout;
  std::vector<int> cats(layout.positions, 0);
  const auto r = static_cast<Eigen::Index>(row);
  for (std::size_t p = 0; p < layout.positions; ++p) {
    if (layout.method == EncodingMethod::IntegerLabel) {
      cats[p] = static_cast<int>(std::lround(x.values(r, static_cast<Eigen::Index>(p))));
      continue;
    }
    for (std::size_t c = 0; c < layout.channels; ++c) {
      if (x.values(r, static_cast<Eigen::Index>(layout.feature_of(p, c))) == 0.0) continue;
      if (cats[p] != 0)
        throw Error(ErrorCode::LayoutMismatch, "position " + std::to_string(p) + " has several set channels");
      cats[p] = static_cast<int>(c) + 1;
    }
  }
  return cats;
}

std::string feature_matrix_csv(const FeatureMatrix& x) {
  std::string out = "id";
  for (std::size_t f = 0; f < x.layout.features(); ++f) out += ",f" + std::to_string(f);
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out += x.row_ids[i];
    for (Eigen::Index f = 0; f < x.values.cols(); ++f) {
      std::snprintf(buf, sizeof buf, ",%.17g", x.values(static_cast<Eigen::Index>(i), f));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string layout_json(const FeatureLayout& layout) {
  nlohmann::json j = {{"m", layout.positions},
                      {"c", layout.channels},
                      {"map_name", layout.map_name},
                      {"method", to_string(layout.method)}};
  return j.dump(2) + "\n";
}

}  // namespace stoic
