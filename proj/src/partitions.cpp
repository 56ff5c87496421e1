#include "efcp/partitions.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "efcp/errors.hpp"

namespace efcp {

namespace {

void check_k(int k) {
  if (k < 1 || k > kMaxColors)
    throw InvalidInput("number of colors must be in [1, " + std::to_string(kMaxColors) +
                       "], got " + std::to_string(k));
}

void check_same_shape(int n1, int k1, int n2, int k2, const char* what) {
  if (n1 != n2 || k1 != k2)
    throw InvalidInput(std::string(what) + ": dimension mismatch (n=" + std::to_string(n1) +
                       ",k=" + std::to_string(k1) + " vs n=" + std::to_string(n2) +
                       ",k=" + std::to_string(k2) + ")");
}

}  // namespace

Subset make_subset(int n, std::span<const int> sites) {
  Subset s(static_cast<std::size_t>(n));
  for (int i : sites) {
    if (i < 0 || i >= n) throw InvalidInput("site out of range: " + std::to_string(i));
    s.set(static_cast<std::size_t>(i));
  }
  return s;
}

std::vector<int> subset_sites(const Subset& s) {
  std::vector<int> out;
  for (auto i = s.find_first(); i != Subset::npos; i = s.find_next(i))
    out.push_back(static_cast<int>(i));
  return out;
}

// ---------------------------------------------------------------- Coloring

Coloring::Coloring(int k, std::vector<std::uint8_t> word) : k_(k), word_(std::move(word)) {
  check_k(k);
  if (word_.empty()) throw InvalidInput("coloring needs at least one site");
  for (auto c : word_)
    if (c >= k) throw InvalidInput("color index " + std::to_string(c) + " outside [0, k)");
}

Coloring Coloring::constant(int n, int k, int color) {
  if (n < 1) throw InvalidInput("n must be positive");
  return Coloring(k, std::vector<std::uint8_t>(static_cast<std::size_t>(n),
                                               static_cast<std::uint8_t>(color)));
}

char color_digit(int color) {
  static constexpr std::string_view kDigits = "123456789abcdefg";
  return kDigits.at(static_cast<std::size_t>(color));
}

int parse_color_digit(char c) {
  if (c >= '1' && c <= '9') return c - '1';
  if (c >= 'a' && c <= 'g') return 9 + (c - 'a');
  throw InvalidInput(std::string("invalid color digit '") + c + "'");
}

Coloring Coloring::parse(std::string_view digits, int k) {
  std::vector<std::uint8_t> word;
  word.reserve(digits.size());
  for (char c : digits) word.push_back(static_cast<std::uint8_t>(parse_color_digit(c)));
  return Coloring(k, std::move(word));
}

Coloring Coloring::from_classes(std::span<const Subset> classes) {
  const int k = static_cast<int>(classes.size());
  check_k(k);
  const auto n = classes.front().size();
  std::vector<std::uint8_t> word(n, 0);
  Subset seen(n);
  for (int c = 0; c < k; ++c) {
    const auto& cls = classes[static_cast<std::size_t>(c)];
    if (cls.size() != n) throw InvalidInput("classes over different ground sets");
    if (seen.intersects(cls)) throw InvalidInput("classes of a labeled partition overlap");
    seen |= cls;
    for (auto i = cls.find_first(); i != Subset::npos; i = cls.find_next(i))
      word[i] = static_cast<std::uint8_t>(c);
  }
  if (!seen.all()) throw InvalidInput("classes of a labeled partition do not cover [n]");
  return Coloring(k, std::move(word));
}

std::vector<Subset> Coloring::classes() const {
  std::vector<Subset> out(static_cast<std::size_t>(k_), Subset(word_.size()));
  for (std::size_t i = 0; i < word_.size(); ++i) out[word_[i]].set(i);
  return out;
}

std::vector<int> Coloring::counts() const {
  std::vector<int> out(static_cast<std::size_t>(k_), 0);
  for (auto c : word_) ++out[c];
  return out;
}

std::string Coloring::to_string() const {
  std::string s;
  s.reserve(word_.size());
  for (auto c : word_) s.push_back(color_digit(c));
  return s;
}

Coloring relabel(const Coloring& x, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != x.k()) throw InvalidInput("relabel: permutation size != k");
  std::vector<std::uint8_t> word(x.word().begin(), x.word().end());
  for (auto& c : word) c = static_cast<std::uint8_t>(perm[c]);
  return Coloring(x.k(), std::move(word));
}

std::size_t coloring_index(const Coloring& x) {
  std::size_t idx = 0;
  for (int i = x.n() - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(x.k()) + x[i];
  return idx;
}

Coloring coloring_at(std::size_t index, int n, int k) {
  std::vector<std::uint8_t> word(static_cast<std::size_t>(n));
  for (auto& c : word) {
    c = static_cast<std::uint8_t>(index % static_cast<std::size_t>(k));
    index /= static_cast<std::size_t>(k);
  }
  return Coloring(k, std::move(word));
}

// ------------------------------------------------------ UnlabeledPartition

UnlabeledPartition::UnlabeledPartition(std::vector<std::vector<int>> blocks) {
  int n = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw InvalidInput("unlabeled partition has an empty block");
    n += static_cast<int>(b.size());
  }
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int i : blocks[b]) {
      if (i < 0 || i >= n || label[static_cast<std::size_t>(i)] != -1)
        throw InvalidInput("blocks must be disjoint with union {0..n-1}");
      label[static_cast<std::size_t>(i)] = static_cast<int>(b);
    }
  std::vector<std::uint8_t> raw(label.begin(), label.end());
  *this = from_block_labels(raw);
}

UnlabeledPartition UnlabeledPartition::from_block_labels(std::span<const std::uint8_t> labels) {
  // Renumber labels in order of first appearance.
  UnlabeledPartition p;
  std::array<int, 256> rank;
  rank.fill(-1);
  p.block_of_.reserve(labels.size());
  for (auto l : labels) {
    if (rank[l] < 0) rank[l] = p.blocks_++;
    p.block_of_.push_back(static_cast<std::uint8_t>(rank[l]));
  }
  return p;
}

std::vector<std::vector<int>> UnlabeledPartition::blocks() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(blocks_));
  for (std::size_t i = 0; i < block_of_.size(); ++i)
    out[block_of_[i]].push_back(static_cast<int>(i));
  return out;
}

UnlabeledPartition project(const Coloring& x) {
  return UnlabeledPartition::from_block_labels(x.word());
}

// --------------------------------------------------------- PartitionMatrix

PartitionMatrix::PartitionMatrix(int n, int k, std::vector<Subset> cells)
    : n_(n), k_(k), cells_(std::move(cells)) {
  check_k(k);
  if (n < 1) throw InvalidInput("partition matrix needs n >= 1");
  if (cells_.size() != static_cast<std::size_t>(k * k))
    throw InvalidInput("partition matrix needs k*k cells");
  rows_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(k), 0);
  for (int col = 0; col < k; ++col) {
    Subset seen(static_cast<std::size_t>(n));
    for (int row = 0; row < k; ++row) {
      const auto& c = cell(row, col);
      if (c.size() != static_cast<std::size_t>(n))
        throw InvalidInput("partition matrix cell over the wrong ground set");
      if (seen.intersects(c))
        throw InvalidInput("column " + std::to_string(col + 1) + " is not a partition: cells overlap");
      seen |= c;
      for (auto i = c.find_first(); i != Subset::npos; i = c.find_next(i))
        rows_[static_cast<std::size_t>(col) * static_cast<std::size_t>(n) + i] =
            static_cast<std::uint8_t>(row);
    }
    if (!seen.all())
      throw InvalidInput("column " + std::to_string(col + 1) + " does not cover [n]");
  }
}

PartitionMatrix::PartitionMatrix(int n, int k, std::vector<std::uint8_t> rows)
    : n_(n), k_(k), rows_(std::move(rows)) {
  cells_.assign(static_cast<std::size_t>(k * k), Subset(static_cast<std::size_t>(n)));
  for (int col = 0; col < k; ++col)
    for (int i = 0; i < n; ++i) cells_[static_cast<std::size_t>(row_of(i, col) * k + col)].set(
        static_cast<std::size_t>(i));
}

PartitionMatrix PartitionMatrix::identity(int n, int k) {
  check_k(k);
  std::vector<std::uint8_t> rows(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  for (int col = 0; col < k; ++col)
    std::fill_n(rows.begin() + static_cast<std::ptrdiff_t>(col) * n, n,
                static_cast<std::uint8_t>(col));
  return PartitionMatrix(n, k, std::move(rows));
}

PartitionMatrix PartitionMatrix::from_columns(std::span<const Coloring> columns) {
  const int k = static_cast<int>(columns.size());
  check_k(k);
  const int n = columns.front().n();
  std::vector<std::uint8_t> rows;
  rows.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  for (const auto& c : columns) {
    check_same_shape(c.n(), c.k(), n, k, "from_columns");
    rows.insert(rows.end(), c.word().begin(), c.word().end());
  }
  return PartitionMatrix(n, k, std::move(rows));
}

std::vector<Coloring> PartitionMatrix::columns() const {
  std::vector<Coloring> out;
  out.reserve(static_cast<std::size_t>(k_));
  for (int col = 0; col < k_; ++col) {
    auto first = rows_.begin() + static_cast<std::ptrdiff_t>(col) * n_;
    out.emplace_back(k_, std::vector<std::uint8_t>(first, first + n_));
  }
  return out;
}

PartitionMatrix matmul(const PartitionMatrix& a, const PartitionMatrix& b) {
  check_same_shape(a.n(), a.k(), b.n(), b.k(), "matmul");
  const int n = a.n();
  const int k = a.k();
  std::vector<Subset> cells;
  cells.reserve(static_cast<std::size_t>(k * k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      Subset acc(static_cast<std::size_t>(n));
      for (int l = 0; l < k; ++l) acc |= a.cell(i, l) & b.cell(l, j);
      cells.push_back(std::move(acc));
    }
  return PartitionMatrix(n, k, std::move(cells));
}

Coloring act(const PartitionMatrix& m, const Coloring& x) {
  check_same_shape(m.n(), m.k(), x.n(), x.k(), "act");
  std::vector<std::uint8_t> word(static_cast<std::size_t>(x.n()));
  for (int i = 0; i < x.n(); ++i)
    word[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(m.row_of(i, x[i]));
  return Coloring(x.k(), std::move(word));
}

PartitionMatrix transport_matrix(const Coloring& from, const Coloring& to) {
  check_same_shape(from.n(), from.k(), to.n(), to.k(), "transport_matrix");
  std::vector<Coloring> cols(static_cast<std::size_t>(from.k()), to);
  return PartitionMatrix::from_columns(cols);
}

PartitionMatrix cyclic_shift_matrix(const Coloring& x) {
  // Entry (r, j) is L_{(r - j) mod k}: column j maps color j to r = x + j.
  const int k = x.k();
  std::vector<Coloring> cols;
  cols.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    std::vector<std::uint8_t> word(static_cast<std::size_t>(x.n()));
    for (int i = 0; i < x.n(); ++i)
      word[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((x[i] + j) % k);
    cols.emplace_back(k, std::move(word));
  }
  return PartitionMatrix::from_columns(cols);
}

Coloring add_mod_k(const Coloring& x, const Coloring& y) {
  check_same_shape(x.n(), x.k(), y.n(), y.k(), "add_mod_k");
  std::vector<std::uint8_t> word(static_cast<std::size_t>(x.n()));
  for (int i = 0; i < x.n(); ++i)
    word[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((x[i] + y[i]) % x.k());
  return Coloring(x.k(), std::move(word));
}

// -------------------------------------------------------------------- JSON

nlohmann::json to_json(const PartitionMatrix& m) {
  auto rows = nlohmann::json::array();
  for (int r = 0; r < m.k(); ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < m.k(); ++c) {
      auto sites = subset_sites(m.cell(r, c));
      for (auto& s : sites) ++s;
      row.push_back(sites);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

PartitionMatrix partition_matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw InvalidInput("partition matrix JSON must be a k x k array");
  const int k = static_cast<int>(j.size());
  int n = 0;
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != k)
      throw InvalidInput("partition matrix JSON must be a k x k array");
  }
  for (const auto& row : j)
    for (const auto& cell : row)
      for (const auto& site : cell) n = std::max(n, site.get<int>());
  std::vector<Subset> cells;
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) {
      auto sites = j[r][c].get<std::vector<int>>();
      for (auto& s : sites) --s;
      cells.push_back(make_subset(n, sites));
    }
  return PartitionMatrix(n, k, std::move(cells));
}

nlohmann::json to_json(const UnlabeledPartition& p) {
  auto out = nlohmann::json::array();
  for (auto block : p.blocks()) {
    for (auto& s : block) ++s;
    out.push_back(block);
  }
  return out;
}

}  // namespace efcp
