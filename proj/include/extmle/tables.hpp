#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace extmle {

// A cross-classification of categorical factors. Cells are ordered
// lexicographically with the LAST factor varying fastest; this ordering is
// fixed here once and every matrix downstream depends on it.
class FactorGrid {
 public:
  FactorGrid(std::vector<std::string> factor_names, std::vector<int> levels);

  int factor_count() const { return static_cast<int>(levels_.size()); }
  int levels(int factor) const { return levels_[factor]; }
  const std::vector<int>& levels() const { return levels_; }
  const std::string& factor_name(int factor) const { return names_[factor]; }
  const std::vector<std::string>& factor_names() const { return names_; }
  int cell_count() const { return cell_count_; }

  // Multi-indices are 0-based internally; file formats use 1-based.
  int to_linear(const std::vector<int>& multi) const;
  std::vector<int> to_multi(int linear) const;

  // Index of the named factor, or -1.
  int factor_index(const std::string& name) const;

  bool operator==(const FactorGrid&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<int> levels_;
  int cell_count_;
};

// An observed table of nonnegative counts over a grid.
class ContingencyTable {
 public:
  ContingencyTable(FactorGrid grid, std::vector<std::int64_t> counts);

  const FactorGrid& grid() const { return grid_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t count(int cell) const { return counts_[cell]; }
  std::int64_t total() const;
  std::vector<int> support() const;

  bool operator==(const ContingencyTable&) const = default;

 private:
  FactorGrid grid_;
  std::vector<std::int64_t> counts_;
};

// Generating class of a hierarchical log-linear model: the maximal
// interaction terms, each a set of 0-based factor indices. Normalization
// drops terms contained in another term.
class ModelSpec {
 public:
  ModelSpec(const FactorGrid& grid, std::vector<std::vector<int>> terms);

  const std::vector<std::vector<int>>& terms() const { return terms_; }
  bool saturated() const { return saturated_; }
  std::string label(const FactorGrid& grid) const;

  bool operator==(const ModelSpec&) const = default;

 private:
  std::vector<std::vector<int>> terms_;  // sorted terms, sorted factor ids
  bool saturated_;
};

// Parses bracketed generating-class notation, e.g. "[12][13][23]".
// Single-character factor names may be concatenated inside a bracket;
// multi-character names must be comma separated, e.g. "[age,sex]".
ModelSpec parse_model(const std::string& spec, const FactorGrid& grid);

// Table document format: {"factors":[{"name":..,"levels":..},...]} plus
// either "counts" (dense, declared cell order) or "cells"
// ([{"index":[1-based..],"count":k}]); omitted cells in sparse form are 0.
ContingencyTable parse_table(const nlohmann::json& doc);
ContingencyTable parse_table_text(const std::string& text);
ContingencyTable load_table(const std::string& path);
nlohmann::json serialize_table(const ContingencyTable& table);

}  // namespace extmle
