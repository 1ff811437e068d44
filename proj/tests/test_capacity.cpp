#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "bigcn/capacity.hpp"
#include "test_util.hpp"

using namespace bigcn;

TEST_CASE("bin_neuron_entropy analytic cases") {
  std::vector<double> uniform;
  for (int rep = 0; rep < 3; ++rep)
    for (int b = 0; b < 200; ++b) uniform.push_back(b + 0.5);
  CHECK(std::abs(bin_neuron_entropy(uniform, 200) - std::log2(200.0)) <= 1e-9);
  CHECK(bin_neuron_entropy(std::vector<double>(50, 3.7), 200) == 0.0);
  std::vector<double> two(40, -1.0);
  two.insert(two.end(), 40, 5.0);
  CHECK(std::abs(bin_neuron_entropy(two, 200) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(bin_neuron_entropy(std::vector<double>{}, 10), std::invalid_argument);
  CHECK_THROWS_AS(bin_neuron_entropy(uniform, 0), std::invalid_argument);
}

TEST_CASE("bin_neuron_entropy matches the oracle on random data") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist;
  for (std::size_t bins : {2, 7, 50, 200}) {
    std::vector<double> x(1000);
    for (double& v : x) v = dist(rng);
    CHECK(bin_neuron_entropy(x, bins) == doctest::Approx(oracle::binned_entropy(x, bins)).epsilon(1e-12));
    CHECK(bin_neuron_entropy(x, bins) <= std::log2(double(bins)) + 1e-12);
  }
}

TEST_CASE("independent layer entropy is additive") {
  DenseMatrix act(64, 3);
  for (std::size_t i = 0; i < 64; ++i) {
    act(i, 0) = double(i % 8);
    act(i, 1) = double(i % 8);  // duplicate neuron counts twice
    act(i, 2) = 1.0;
  }
  const auto e = layer_entropy_independent(act, 8);
  CHECK(e.per_neuron[0] == doctest::Approx(3.0));
  CHECK(e.per_neuron[1] == doctest::Approx(3.0));
  CHECK(e.per_neuron[2] == 0.0);
  CHECK(e.independent_sum == doctest::Approx(6.0));
}

TEST_CASE("capacity lower bound") {
  CHECK(capacity_lower_bound(std::vector<double>{97.37}).d_bin_lower == 98u);
  CHECK(capacity_lower_bound(std::vector<double>{64.0}).d_bin_lower == 64u);
  CHECK(capacity_lower_bound(std::vector<double>{10.2, 33.7}).d_bin_lower == 34u);
  CHECK_THROWS_AS(capacity_lower_bound(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("activation dump roundtrip") {
  const auto path = std::filesystem::temp_directory_path() / "bigcn_test_dump.bin";
  const DenseMatrix act{{0.5, -1.25}, {3.0, 0.0}, {2.0, 8.0}};
  write_activation_dump(path, act);
  CHECK(read_activation_dump(path) == act);
  std::filesystem::remove(path);
  CHECK_THROWS(read_activation_dump(path));
}
