#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bigcn/dense_matrix.hpp"

namespace bigcn {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t length) {
  return (length + kWordBits - 1) / kWordBits;
}

/// Non-owning view over packed sign bits. Bit 1 is +1, bit 0 is -1.
struct BitSpan {
  std::span<const Word> words;
  std::size_t length = 0;
};

/// Packed ±1 vector. Padding bits past `length()` are always 1, so two
/// vectors of equal length compare equal iff their words do.
class BitVector {
 public:
  BitVector() = default;
  /// All-(+1) vector of the given length.
  explicit BitVector(std::size_t length);

  static BitVector from_words(std::vector<Word> words, std::size_t length);

  std::size_t length() const { return length_; }
  std::span<const Word> words() const { return words_; }
  BitSpan view() const { return {words_, length_}; }

  /// +1 or -1.
  int operator[](std::size_t i) const {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U ? 1 : -1;
  }

  bool operator==(const BitVector&) const = default;

 private:
  friend BitVector pack(std::span<const int> signs);
  friend std::pair<BitVector, double> binarize_vector(std::span<const double> v);

  std::vector<Word> words_;
  std::size_t length_ = 0;
};

/// Mask selecting the valid bits of the final word of a `length`-bit vector.
constexpr Word tail_mask(std::size_t length) {
  const std::size_t rem = length % kWordBits;
  return rem == 0 ? ~Word{0} : (Word{1} << rem) - 1;
}

BitVector pack(std::span<const int> signs);
std::vector<int> unpack(const BitVector& bits);

/// Closed-form least-squares binarization: signs with sign(0) = +1 and the
/// scalar mean(|v|).
std::pair<BitVector, double> binarize_vector(std::span<const double> v);

/// ±1 inner product via XNOR and popcount; padding bits are masked out.
std::int64_t xnor_popcount_dot(BitSpan a, BitSpan b);
std::int64_t xnor_popcount_dot(const BitVector& a, const BitVector& b);

enum class BucketAxis { kRows, kColumns };

/// A ±1 matrix stored one bucket (row or column) per packed bit run, each
/// bucket carrying its own nonnegative rescaling scalar.
class PackedBinMatrix {
 public:
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  BucketAxis axis() const { return axis_; }
  std::size_t bucket_count() const { return scalars_.size(); }
  std::size_t bucket_length() const { return axis_ == BucketAxis::kRows ? cols_ : rows_; }
  std::size_t words_per_bucket() const { return words_per_bucket_; }

  BitSpan bucket(std::size_t i) const {
    return {std::span<const Word>(words_).subspan(i * words_per_bucket_, words_per_bucket_),
            bucket_length()};
  }
  std::span<const double> scalars() const { return scalars_; }

  /// Entry of the sign matrix at (r, c) as +1 / -1.
  int sign(std::size_t r, std::size_t c) const;

  /// Dense scalar × sign reconstruction.
  DenseMatrix reconstruct() const;
  /// The bare ±1 matrix without scalars.
  DenseMatrix signs() const;

 private:
  friend PackedBinMatrix binarize_rows(const DenseMatrix& h);
  friend PackedBinMatrix binarize_columns(const DenseMatrix& w);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  BucketAxis axis_ = BucketAxis::kRows;
  std::size_t words_per_bucket_ = 0;
  std::vector<Word> words_;
  std::vector<double> scalars_;
};

/// Row buckets: β_i = mean |H_i,:|, F_i = sign(H_i,:).
PackedBinMatrix binarize_rows(const DenseMatrix& h);
/// Column buckets: α_j = mean |W_:,j|, B_j = sign(W_:,j).
PackedBinMatrix binarize_columns(const DenseMatrix& w);

/// out_ij = β_i α_j (F_i ⊛ B_j). `f` must be row-bucketed, `b` column-bucketed.
DenseMatrix bin_gemm(const PackedBinMatrix& f, const PackedBinMatrix& b);

}  // namespace bigcn
