#include "bigcn/bitlinalg.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bigcn {

namespace {

// Sets bit i of `words` to the sign of `value` (sign(0) = +1). Words are
// expected to start as all-ones, so only negative entries need writing.
inline void store_sign(std::span<Word> words, std::size_t i, double value) {
  if (value < 0.0) words[i / kWordBits] &= ~(Word{1} << (i % kWordBits));
}

void require_finite(double v, const char* op) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(op) + ": non-finite entry");
}

}  // namespace

BitVector::BitVector(std::size_t length)
    : words_(words_for(length), ~Word{0}), length_(length) {}

BitVector BitVector::from_words(std::vector<Word> words, std::size_t length) {
  if (words.size() != words_for(length)) {
    throw std::invalid_argument("BitVector: expected " + std::to_string(words_for(length)) +
                                " words for length " + std::to_string(length));
  }
  if (!words.empty()) words.back() |= ~tail_mask(length);
  BitVector out;
  out.words_ = std::move(words);
  out.length_ = length;
  return out;
}

BitVector pack(std::span<const int> signs) {
  BitVector out(signs.size());
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == -1) {
      out.words_[i / kWordBits] &= ~(Word{1} << (i % kWordBits));
    } else if (signs[i] != 1) {
      throw std::invalid_argument("pack: entry " + std::to_string(i) + " is " +
                                  std::to_string(signs[i]) + ", expected -1 or +1");
    }
  }
  return out;
}

std::vector<int> unpack(const BitVector& bits) {
  std::vector<int> out(bits.length());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = bits[i];
  return out;
}

std::pair<BitVector, double> binarize_vector(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("binarize_vector: empty vector");
  BitVector bits(v.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    require_finite(v[i], "binarize_vector");
    store_sign(bits.words_, i, v[i]);
    l1 += std::abs(v[i]);
  }
  return {std::move(bits), l1 / static_cast<double>(v.size())};
}

std::int64_t xnor_popcount_dot(BitSpan a, BitSpan b) {
  if (a.length != b.length || a.words.size() != b.words.size()) {
    throw std::invalid_argument("xnor_popcount_dot: length mismatch " +
                                std::to_string(a.length) + " vs " + std::to_string(b.length));
  }
  if (a.length == 0) return 0;
  const std::size_t last = a.words.size() - 1;
  std::int64_t agree = 0;
  for (std::size_t w = 0; w < last; ++w) agree += std::popcount(~(a.words[w] ^ b.words[w]));
  agree += std::popcount(~(a.words[last] ^ b.words[last]) & tail_mask(a.length));
  return 2 * agree - static_cast<std::int64_t>(a.length);
}

std::int64_t xnor_popcount_dot(const BitVector& a, const BitVector& b) {
  return xnor_popcount_dot(a.view(), b.view());
}

int PackedBinMatrix::sign(std::size_t r, std::size_t c) const {
  const std::size_t bucket_idx = axis_ == BucketAxis::kRows ? r : c;
  const std::size_t pos = axis_ == BucketAxis::kRows ? c : r;
  const Word w = words_[bucket_idx * words_per_bucket_ + pos / kWordBits];
  return (w >> (pos % kWordBits)) & 1U ? 1 : -1;
}

DenseMatrix PackedBinMatrix::signs() const {
  DenseMatrix out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(r, c) = sign(r, c);
  return out;
}

DenseMatrix PackedBinMatrix::reconstruct() const {
  DenseMatrix out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      const double s = scalars_[axis_ == BucketAxis::kRows ? r : c];
      out(r, c) = s * sign(r, c);
    }
  }
  return out;
}

PackedBinMatrix binarize_rows(const DenseMatrix& h) {
  if (h.rows() == 0 || h.cols() == 0) throw std::invalid_argument("binarize_rows: empty matrix");
  PackedBinMatrix out;
  out.rows_ = h.rows();
  out.cols_ = h.cols();
  out.axis_ = BucketAxis::kRows;
  out.words_per_bucket_ = words_for(h.cols());
  out.words_.assign(out.words_per_bucket_ * h.rows(), ~Word{0});
  out.scalars_.resize(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    std::span<Word> bucket(out.words_.data() + i * out.words_per_bucket_, out.words_per_bucket_);
    double l1 = 0.0;
    for (std::size_t k = 0; k < h.cols(); ++k) {
      const double v = h(i, k);
      require_finite(v, "binarize_rows");
      store_sign(bucket, k, v);
      l1 += std::abs(v);
    }
    out.scalars_[i] = l1 / static_cast<double>(h.cols());
  }
  return out;
}

PackedBinMatrix binarize_columns(const DenseMatrix& w) {
  if (w.rows() == 0 || w.cols() == 0) {
    throw std::invalid_argument("binarize_columns: empty matrix");
  }
  PackedBinMatrix out;
  out.rows_ = w.rows();
  out.cols_ = w.cols();
  out.axis_ = BucketAxis::kColumns;
  out.words_per_bucket_ = words_for(w.rows());
  out.words_.assign(out.words_per_bucket_ * w.cols(), ~Word{0});
  out.scalars_.assign(w.cols(), 0.0);
  for (std::size_t k = 0; k < w.rows(); ++k) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double v = w(k, j);
      require_finite(v, "binarize_columns");
      std::span<Word> bucket(out.words_.data() + j * out.words_per_bucket_,
                             out.words_per_bucket_);
      store_sign(bucket, k, v);
      out.scalars_[j] += std::abs(v);
    }
  }
  for (double& a : out.scalars_) a /= static_cast<double>(w.rows());
  return out;
}

DenseMatrix bin_gemm(const PackedBinMatrix& f, const PackedBinMatrix& b) {
  if (f.axis() != BucketAxis::kRows || b.axis() != BucketAxis::kColumns) {
    throw std::invalid_argument("bin_gemm: expected row-bucketed lhs and column-bucketed rhs");
  }
  if (f.cols() != b.rows()) {
    throw std::invalid_argument("bin_gemm: inner dimension mismatch " +
                                std::to_string(f.cols()) + " vs " + std::to_string(b.rows()));
  }
  DenseMatrix out(f.rows(), b.cols());
  const auto beta = f.scalars();
  const auto alpha = b.scalars();
  for (std::size_t i = 0; i < f.rows(); ++i) {
    const BitSpan fi = f.bucket(i);
    auto out_row = out.row(i);
    for (std::size_t j = 0; j < b.cols(); ++j) {
      out_row[j] = beta[i] * alpha[j] * static_cast<double>(xnor_popcount_dot(fi, b.bucket(j)));
    }
  }
  return out;
}

}  // namespace bigcn
