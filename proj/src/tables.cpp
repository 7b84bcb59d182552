#include "extmle/tables.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace extmle {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

}  // namespace

FactorGrid::FactorGrid(std::vector<std::string> factor_names,
                       std::vector<int> levels)
    : names_(std::move(factor_names)), levels_(std::move(levels)) {
  if (names_.size() != levels_.size())
    fail("factor name/level lists differ in length");
  if (levels_.empty()) fail("grid needs at least one factor");
  long long n = 1;
  for (int l : levels_) {
    if (l < 2) fail("every factor needs at least 2 levels");
    n *= l;
    if (n > (1 << 28)) fail("grid too large");
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) fail("duplicate factor name");
  cell_count_ = static_cast<int>(n);
}

int FactorGrid::to_linear(const std::vector<int>& multi) const {
  if (multi.size() != levels_.size()) fail("multi-index has wrong arity");
  int idx = 0;
  for (std::size_t k = 0; k < multi.size(); ++k) {
    if (multi[k] < 0 || multi[k] >= levels_[k])
      fail("multi-index out of range for factor " + names_[k]);
    idx = idx * levels_[k] + multi[k];
  }
  return idx;
}

std::vector<int> FactorGrid::to_multi(int linear) const {
  std::vector<int> multi(levels_.size());
  for (int k = static_cast<int>(levels_.size()) - 1; k >= 0; --k) {
    multi[k] = linear % levels_[k];
    linear /= levels_[k];
  }
  return multi;
}

int FactorGrid::factor_index(const std::string& name) const {
  for (std::size_t k = 0; k < names_.size(); ++k)
    if (names_[k] == name) return static_cast<int>(k);
  return -1;
}

ContingencyTable::ContingencyTable(FactorGrid grid,
                                   std::vector<std::int64_t> counts)
    : grid_(std::move(grid)), counts_(std::move(counts)) {
  if (static_cast<int>(counts_.size()) != grid_.cell_count())
    fail("count vector length does not match cell count");
  for (std::int64_t c : counts_)
    if (c < 0) fail("negative count");
}

std::int64_t ContingencyTable::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::vector<int> ContingencyTable::support() const {
  std::vector<int> s;
  for (int i = 0; i < static_cast<int>(counts_.size()); ++i)
    if (counts_[i] > 0) s.push_back(i);
  return s;
}

ModelSpec::ModelSpec(const FactorGrid& grid,
                     std::vector<std::vector<int>> terms) {
  if (terms.empty()) fail("empty generating class");
  for (auto& t : terms) {
    if (t.empty()) fail("empty term in generating class");
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    for (int f : t)
      if (f < 0 || f >= grid.factor_count())
        fail("term references unknown factor");
  }
  // Keep maximal terms only.
  for (const auto& t : terms) {
    bool dominated = false;
    for (const auto& u : terms)
      if (&u != &t && u.size() >= t.size() &&
          std::includes(u.begin(), u.end(), t.begin(), t.end()) && u != t)
        dominated = true;
    if (!dominated &&
        std::find(terms_.begin(), terms_.end(), t) == terms_.end())
      terms_.push_back(t);
  }
  std::sort(terms_.begin(), terms_.end());
  saturated_ = false;
  for (const auto& t : terms_)
    if (static_cast<int>(t.size()) == grid.factor_count()) saturated_ = true;
}

std::string ModelSpec::label(const FactorGrid& grid) const {
  std::string out;
  for (const auto& t : terms_) {
    out += '[';
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k) out += ',';
      out += grid.factor_name(t[k]);
    }
    out += ']';
  }
  return out;
}

ModelSpec parse_model(const std::string& spec, const FactorGrid& grid) {
  std::vector<std::vector<int>> terms;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < spec.size() && std::isspace(static_cast<unsigned char>(spec[pos]))) ++pos;
  };
  skip_ws();
  while (pos < spec.size()) {
    if (spec[pos] != '[') fail("expected '[' in model spec");
    std::size_t close = spec.find(']', pos);
    if (close == std::string::npos) fail("unbalanced '[' in model spec");
    std::string body = spec.substr(pos + 1, close - pos - 1);
    if (body.empty()) fail("empty term in model spec");
    std::vector<int> term;
    auto push_label = [&](const std::string& lab) {
      int f = grid.factor_index(lab);
      if (f < 0) fail("unknown factor label '" + lab + "'");
      term.push_back(f);
    };
    if (body.find(',') != std::string::npos) {
      std::stringstream ss(body);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (tok.empty()) fail("empty factor label in term");
        push_label(tok);
      }
    } else {
      for (char ch : body) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        push_label(std::string(1, ch));
      }
    }
    if (term.empty()) fail("empty term in model spec");
    terms.push_back(term);
    pos = close + 1;
    skip_ws();
  }
  if (terms.empty()) fail("empty model spec");
  return ModelSpec(grid, std::move(terms));
}

ContingencyTable parse_table(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("factors"))
    fail("table document needs a 'factors' array");
  std::vector<std::string> names;
  std::vector<int> levels;
  for (const auto& f : doc.at("factors")) {
    names.push_back(f.at("name").get<std::string>());
    if (!f.at("levels").is_number_integer()) fail("levels must be an integer");
    levels.push_back(f.at("levels").get<int>());
  }
  FactorGrid grid(std::move(names), std::move(levels));

  std::vector<std::int64_t> counts(grid.cell_count(), 0);
  if (doc.contains("counts") == doc.contains("cells"))
    fail("table document needs exactly one of 'counts' or 'cells'");
  if (doc.contains("counts")) {
    const auto& arr = doc.at("counts");
    if (static_cast<int>(arr.size()) != grid.cell_count())
      fail("dense count vector has wrong length");
    for (int i = 0; i < grid.cell_count(); ++i) {
      if (!arr[i].is_number_integer()) fail("count is not an integer");
      counts[i] = arr[i].get<std::int64_t>();
    }
  } else {
    std::set<int> seen;
    for (const auto& rec : doc.at("cells")) {
      std::vector<int> multi;
      for (const auto& ix : rec.at("index")) {
        if (!ix.is_number_integer()) fail("cell index is not an integer");
        multi.push_back(ix.get<int>() - 1);  // file format is 1-based
      }
      int cell = grid.to_linear(multi);
      if (!seen.insert(cell).second) fail("duplicate cell record");
      if (!rec.at("count").is_number_integer())
        fail("count is not an integer");
      counts[cell] = rec.at("count").get<std::int64_t>();
    }
  }
  return ContingencyTable(std::move(grid), std::move(counts));
}

ContingencyTable parse_table_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("table document is not valid JSON: ") + e.what());
  }
  return parse_table(doc);
}

ContingencyTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open table file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_table_text(ss.str());
}

nlohmann::json serialize_table(const ContingencyTable& table) {
  nlohmann::json doc;
  doc["factors"] = nlohmann::json::array();
  const FactorGrid& g = table.grid();
  for (int k = 0; k < g.factor_count(); ++k)
    doc["factors"].push_back(
        {{"name", g.factor_name(k)}, {"levels", g.levels(k)}});
  doc["counts"] = table.counts();
  return doc;
}

}  // namespace extmle
