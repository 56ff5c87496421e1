#pragma once

// Labeled and unlabeled k-ary partitions of [n], partition matrices and
// their action on colorings.
//
// Sites and colors are 0-based in memory. The text form of a coloring uses
// the digits 1..9 then a..g for colors 1..16, so "1122" is the labeled
// partition ({1,2},{3,4}) of [4].

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <json.hpp>

namespace efcp {

inline constexpr int kMaxColors = 16;

/// A subset of [n], one bit per site.
using Subset = boost::dynamic_bitset<std::uint64_t>;

Subset make_subset(int n, std::span<const int> sites);
std::vector<int> subset_sites(const Subset& s);

/// A k-coloring of [n]: the chain state, equivalently a labeled partition
/// (L_1, ..., L_k) with L_j = { i : word[i] = j }.
class Coloring {
 public:
  Coloring() = default;
  Coloring(int k, std::vector<std::uint8_t> word);

  static Coloring constant(int n, int k, int color = 0);
  static Coloring parse(std::string_view digits, int k);
  /// From a labeled partition; classes must be disjoint and cover [n].
  static Coloring from_classes(std::span<const Subset> classes);

  int n() const noexcept { return static_cast<int>(word_.size()); }
  int k() const noexcept { return k_; }
  int operator[](int site) const noexcept { return word_[static_cast<std::size_t>(site)]; }
  std::span<const std::uint8_t> word() const noexcept { return word_; }

  std::vector<Subset> classes() const;
  std::vector<int> counts() const;
  std::string to_string() const;

  friend bool operator==(const Coloring&, const Coloring&) = default;
  friend auto operator<=>(const Coloring&, const Coloring&) = default;

 private:
  int k_ = 1;
  std::vector<std::uint8_t> word_;
};

char color_digit(int color);
int parse_color_digit(char c);

/// Coloring with colors renamed by perm (color c becomes perm[c]).
Coloring relabel(const Coloring& x, std::span<const int> perm);

/// Index of a coloring in [k]^n under the little-endian base-k order
/// (site 0 is the least significant digit); inverse is coloring_at.
std::size_t coloring_index(const Coloring& x);
Coloring coloring_at(std::size_t index, int n, int k);

/// Unlabeled partition of [n] into at most k nonempty blocks, blocks ordered
/// by least element. Stored as its restricted growth string: block_of[i] is
/// the rank of the block containing i.
class UnlabeledPartition {
 public:
  UnlabeledPartition() = default;
  explicit UnlabeledPartition(std::vector<std::vector<int>> blocks);

  static UnlabeledPartition from_block_labels(std::span<const std::uint8_t> labels);

  int n() const noexcept { return static_cast<int>(block_of_.size()); }
  int block_count() const noexcept { return blocks_; }
  std::span<const std::uint8_t> block_labels() const noexcept { return block_of_; }
  std::vector<std::vector<int>> blocks() const;

  friend bool operator==(const UnlabeledPartition&, const UnlabeledPartition&) = default;
  friend auto operator<=>(const UnlabeledPartition&, const UnlabeledPartition&) = default;

 private:
  std::vector<std::uint8_t> block_of_;
  int blocks_ = 0;
};

/// Natural projection: drop the labels (and the empty classes).
UnlabeledPartition project(const Coloring& x);

/// k x k matrix of subsets of [n], every column a labeled k-ary partition.
class PartitionMatrix {
 public:
  /// cells in row-major order, cells[row * k + col].
  PartitionMatrix(int n, int k, std::vector<Subset> cells);

  static PartitionMatrix identity(int n, int k);
  /// Column j is the labeled partition given by columns[j].
  static PartitionMatrix from_columns(std::span<const Coloring> columns);

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  const Subset& cell(int row, int col) const {
    return cells_[static_cast<std::size_t>(row * k_ + col)];
  }
  /// Row r with site in cell (r, col).
  int row_of(int site, int col) const noexcept {
    return rows_[static_cast<std::size_t>(col) * static_cast<std::size_t>(n_) +
                 static_cast<std::size_t>(site)];
  }
  /// The k-tuple-of-colorings view: column j as a coloring.
  std::vector<Coloring> columns() const;

  friend bool operator==(const PartitionMatrix& a, const PartitionMatrix& b) {
    return a.n_ == b.n_ && a.k_ == b.k_ && a.cells_ == b.cells_;
  }

 private:
  PartitionMatrix(int n, int k, std::vector<std::uint8_t> rows);

  int n_;
  int k_;
  std::vector<Subset> cells_;
  std::vector<std::uint8_t> rows_;  // column-major lookup, rows_[col * n + site]
};

/// (a*b)(i,j) = union over l of a(i,l) ∩ b(l,j).
PartitionMatrix matmul(const PartitionMatrix& a, const PartitionMatrix& b);
inline PartitionMatrix operator*(const PartitionMatrix& a, const PartitionMatrix& b) {
  return matmul(a, b);
}

/// Site i moves to the row r with i in m(r, x[i]).
Coloring act(const PartitionMatrix& m, const Coloring& x);

/// A partition matrix m with act(m, from) = to. Every column is the target
/// partition, so any m with those columns in use works; this one is the
/// simplest witness.
PartitionMatrix transport_matrix(const Coloring& from, const Coloring& to);

/// Column j holds the j-th cyclic shift of the classes of x, so acting with
/// it adds x to a coloring coordinatewise mod k.
PartitionMatrix cyclic_shift_matrix(const Coloring& x);

/// (x + y)[i] = x[i] + y[i] mod k, with 0-based colors.
Coloring add_mod_k(const Coloring& x, const Coloring& y);

// JSON forms: colorings are digit strings; partition matrices are k x k
// arrays of sorted 1-based site lists; unlabeled partitions are lists of
// sorted 1-based blocks.
nlohmann::json to_json(const PartitionMatrix& m);
PartitionMatrix partition_matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const UnlabeledPartition& p);

}  // namespace efcp
