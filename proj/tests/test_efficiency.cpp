#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bigcn/efficiency.hpp"

using namespace bigcn;

namespace {

// Cycle model written out term by term for a two-layer network.
std::uint64_t float_cycles_2layer(std::uint64_t n, std::uint64_t e, std::uint64_t d, std::uint64_t h,
                                  std::uint64_t c) {
  return n * d * h + e * h + n * h * c + e * c;
}

std::uint64_t binary_cycles_2layer(std::uint64_t n, std::uint64_t e, std::uint64_t d, std::uint64_t h,
                                   std::uint64_t c) {
  auto ceil64 = [](std::uint64_t x) { return (x + 63) / 64; };
  return ceil64(n * d * h) + 2 * n * h + e * h + ceil64(n * h * c) + 2 * n * c + e * c;
}

const GraphStats kCora{2708, 5429, 1433};

}  // namespace

TEST_CASE("Cora cycle counts") {
  const auto f = cycle_ops(ArchSpec::uniform({1433, 64, 7}, false), kCora);
  const auto b = cycle_ops(ArchSpec::uniform({1433, 64, 7}, true), kCora);
  CHECK(f == 249'954'739u);
  CHECK(b == 4'669'515u);
  CHECK(f == float_cycles_2layer(2708, 5429, 1433, 64, 7));
  CHECK(b == binary_cycles_2layer(2708, 5429, 1433, 64, 7));
  CHECK(double(f) / double(b) == doctest::Approx(53.5).epsilon(0.1 / 53.5));
  CHECK(cycle_ops(ArchSpec::uniform({1433}, true), kCora) == 0u);
}

TEST_CASE("binary term rounds up per layer") {
  const GraphStats s{3, 0, 5};
  // 3*5*7 = 105 -> ceil(105/64) = 2, plus 2*3*7 = 42.
  CHECK(cycle_ops(ArchSpec::uniform({5, 7}, true), s) == 44u);
}

TEST_CASE("model and data sizes") {
  const auto m = model_size_bits(ArchSpec::uniform({1433, 64, 7}, true));
  CHECK(m.float_bits == 2'949'120u);
  CHECK(m.binary_bits == 94'432u);
  CHECK(bits_to_kib(m.float_bits) == doctest::Approx(360.0));
  CHECK(std::round(bits_to_kib(m.binary_bits) * 100) / 100 == doctest::Approx(11.53));
  CHECK(m.ratio() == doctest::Approx(31.2).epsilon(0.1 / 31.2));

  const auto d = data_size_bits(kCora);
  CHECK(d.float_bits == 32u * 2708u * 1433u);
  CHECK(d.float_bits == 124'178'048u);
  CHECK(d.binary_bits == 3'967'220u);
  CHECK(std::round(bits_to_mib(d.float_bits) * 10) / 10 == doctest::Approx(14.8));
  CHECK(std::round(bits_to_mib(d.binary_bits) * 100) / 100 == doctest::Approx(0.47));

  const auto tiny = model_size_bits(ArchSpec::uniform({1, 1}, true));
  CHECK(tiny.float_bits == 32u);
  CHECK(tiny.binary_bits == 33u);
}

TEST_CASE("compression ratios") {
  CHECK(param_compression_ratio(32) == 16.0);
  CHECK(data_compression_ratio(32) == 16.0);
  CHECK(data_compression_ratio(1) == doctest::Approx(32.0 / 33.0));
  CHECK(data_compression_ratio(1433) == doctest::Approx(31.30).epsilon(0.005 / 31.3));
  for (double d : {1.0, 10.0, 1e3, 1e6, 1e9}) CHECK(param_compression_ratio(d) < 32.0);
  CHECK_THROWS_AS(param_compression_ratio(0.5), std::invalid_argument);
}

TEST_CASE("acceleration ratios") {
  const double deg = kCora.avg_degree();
  const auto first = acceleration_ratios(1433, deg);
  const auto second = acceleration_ratios(64, deg);
  CHECK(first.feature_extraction == doctest::Approx(64.0 * 1433 / (1433 + 128)));
  CHECK(first.feature_extraction >= 58.5);
  CHECK(first.feature_extraction <= 59.0);
  CHECK(second.feature_extraction >= 21.0);
  CHECK(second.feature_extraction <= 21.5);
  for (double d_in : {3.0, 16.0, 64.0, 1433.0}) {
    const auto r = acceleration_ratios(d_in, deg);
    CHECK(r.full > 1.0);
    CHECK(r.full < r.feature_extraction);
  }
  CHECK(acceleration_ratios(1433, 1e12).full == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("efficiency report") {
  const auto r = efficiency_report({1433, 64, 7}, kCora);
  CHECK(r.float_cycles == 249'954'739u);
  CHECK(r.binary_cycles == 4'669'515u);
  REQUIRE(r.layers.size() == 2);
  CHECK(r.layers[0].float_cycles + r.layers[1].float_cycles == r.float_cycles);
  CHECK(r.layers[0].binary_cycles + r.layers[1].binary_cycles == r.binary_cycles);
  CHECK_THROWS_AS(efficiency_report({1000, 64, 7}, kCora), std::invalid_argument);
}
