#include <doctest.h>

#include <cmath>
#include <random>

#include "imsim/constellation.hpp"
#include "imsim/rng.hpp"

using namespace imsim;

TEST_CASE("bpsk maps bit 0 to +1 and bit 1 to -1") {
  auto c = Constellation::make(Modulation::Bpsk);
  std::vector<uint8_t> bits = {0, 1};
  auto sym = map_symbols(bits, c);
  CHECK(sym[0] == cplx{1.0, 0.0});
  CHECK(sym[1] == cplx{-1.0, 0.0});
}

TEST_CASE("empty bit sequence maps to no symbols") {
  auto c = Constellation::make(Modulation::Qam16);
  CHECK(map_symbols({}, c).empty());
}

TEST_CASE("map_symbols rejects ragged input") {
  auto c = Constellation::make(Modulation::Qpsk);
  std::vector<uint8_t> bits = {1, 0, 1};
  CHECK_THROWS_AS(map_symbols(bits, c), InputError);
}

TEST_CASE("unit average energy, all orders") {
  for (auto mod : {Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam8,
                   Modulation::Qam16, Modulation::Qam64}) {
    auto c = Constellation::make(mod);
    double e = 0.0;
    for (auto s : c.points()) e += std::norm(s);
    CHECK(e / c.order() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("demapping a constellation point returns it exactly") {
  for (auto mod : {Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam8,
                   Modulation::Qam16, Modulation::Qam64}) {
    auto c = Constellation::make(mod);
    for (int l = 0; l < c.order(); ++l) {
      auto d = demap_symbol(c.point(l), c);
      CHECK(d.label == l);
    }
  }
}

TEST_CASE("bpsk equidistant point breaks the tie to the lowest index") {
  auto c = Constellation::make(Modulation::Bpsk);
  CHECK(demap_symbol(cplx{0.0, 0.0}, c).label == 0);
}

TEST_CASE("nearest decision matches exhaustive search under perturbation") {
  auto c = Constellation::make(Modulation::Qpsk);
  // Minimum distance of unit-energy QPSK is sqrt(2); any perturbation below
  // half of it keeps the decision.
  Rng rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    int l = static_cast<int>(rng.next_u64() % 4);
    double ang = 2.0 * kPi * rng.uniform();
    double mag = 0.49 * std::sqrt(2.0) * rng.uniform();
    cplx z = 0.9 * c.point(l) +
             cplx{mag * std::cos(ang), mag * std::sin(ang)} * 0.1;
    int brute = 0;
    double best = 1e300;
    for (int m = 0; m < 4; ++m)
      if (std::norm(z - c.point(m)) < best) {
        best = std::norm(z - c.point(m));
        brute = m;
      }
    CHECK(demap_symbol(z, c).label == brute);
  }
}

TEST_CASE("bit to symbol map round-trips for every word") {
  for (auto mod : {Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam8,
                   Modulation::Qam16, Modulation::Qam64}) {
    auto c = Constellation::make(mod);
    for (int w = 0; w < c.order(); ++w) {
      auto bits = word_to_bits(static_cast<uint64_t>(w), c.bits_per_symbol());
      auto sym = map_symbols(bits, c);
      REQUIRE(sym.size() == 1);
      auto d = demap_symbol(sym[0], c);
      CHECK(d.bits == bits);
    }
  }
}

TEST_CASE("empirical symbol energy from random bits") {
  auto c = Constellation::make(Modulation::Qam64);
  Rng rng(6);
  const int count = 100000;
  std::vector<uint8_t> bits(static_cast<size_t>(count) *
                            c.bits_per_symbol());
  rng.fill_bits(bits.data(), bits.size());
  auto sym = map_symbols(bits, c);
  double e = 0.0;
  for (auto s : sym) e += std::norm(s);
  CHECK(e / count == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("gray labeling: axis neighbors differ in exactly one bit") {
  for (auto mod : {Modulation::Qpsk, Modulation::Qam8, Modulation::Qam16,
                   Modulation::Qam64}) {
    auto c = Constellation::make(mod);
    // Grid step along one axis for the normalized constellation.
    double step = 1e300;
    for (int i = 0; i < c.order(); ++i)
      for (int j = 0; j < c.order(); ++j) {
        if (i == j) continue;
        cplx d = c.point(i) - c.point(j);
        if (std::abs(d.imag()) < 1e-12 && std::abs(d.real()) > 1e-12)
          step = std::min(step, std::abs(d.real()));
      }
    int checked = 0;
    for (int i = 0; i < c.order(); ++i)
      for (int j = 0; j < c.order(); ++j) {
        if (i == j) continue;
        cplx d = c.point(i) - c.point(j);
        bool horizontal = std::abs(d.imag()) < 1e-12 &&
                          std::abs(std::abs(d.real()) - step) < 1e-9;
        bool vertical = std::abs(d.real()) < 1e-12 &&
                        std::abs(std::abs(d.imag()) - step) < 1e-9;
        if (!horizontal && !vertical) continue;
        int diff = __builtin_popcount(static_cast<unsigned>(i ^ j));
        CHECK(diff == 1);
        ++checked;
      }
    CHECK(checked > 0);
  }
}
