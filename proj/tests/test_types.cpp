#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "helpers.hpp"
#include "unmix/types.hpp"

using namespace unmix;
using testutil::grid_of;
using testutil::names_of;

namespace {

errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an unmix::Error");
  return errc::parse_error;
}

}  // namespace

TEST_CASE("angle grid enforces strict monotonicity") {
  CHECK_NOTHROW(AngleGrid({5.0}));
  CHECK_NOTHROW(AngleGrid({5.0, 5.1, 7.0}));
  CHECK_THROWS_AS(AngleGrid({}), std::invalid_argument);
  CHECK_THROWS_AS(AngleGrid({5.0, 5.0}), std::invalid_argument);
  CHECK_THROWS_AS(AngleGrid({5.0, 4.9}), std::invalid_argument);
}

TEST_CASE("make_linear_grid hits both endpoints") {
  GridPtr grid = make_linear_grid(5.0, 85.0, 4000);
  CHECK(grid->size() == 4000);
  CHECK(grid->front() == 5.0);
  CHECK(grid->back() == 85.0);
}

TEST_CASE("spectrum invariants") {
  GridPtr grid = grid_of({1.0, 2.0, 3.0});
  CHECK_NOTHROW(Spectrum(grid, {0.0, 1.0, 0.0}));
  CHECK(code_of([&] { Spectrum(grid, {1.0, 2.0}); }) == errc::grid_mismatch);
  CHECK(code_of([&] { Spectrum(grid, {1.0, -1.0, 0.0}); }) == errc::negative_intensity);
  CHECK(code_of([&] { Spectrum(grid, {0.0, 0.0, 0.0}); }) == errc::all_zero);
}

TEST_CASE("normalize_composition worked examples") {
  PhaseNamesPtr ab = names_of({"a", "b"});
  PhaseNamesPtr abc = names_of({"a", "b", "c"});

  Composition c1 = normalize_composition({0.6, 0.4}, ab);
  CHECK(c1[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(c1[1] == doctest::Approx(0.4).epsilon(1e-12));

  Composition c2 = normalize_composition({2.0, 2.0}, ab);
  CHECK(c2[0] == 0.5);
  CHECK(c2[1] == 0.5);

  Composition c3 = normalize_composition({0.3, 0.0, 0.9}, abc);
  CHECK(c3[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c3[1] == 0.0);
  CHECK(c3[2] == doctest::Approx(0.75).epsilon(1e-12));

  CHECK(code_of([&] { normalize_composition({0.0, 0.0}, ab); }) == errc::all_zero);
  CHECK(code_of([&] { normalize_composition({-0.1, 1.1}, ab); }) == errc::bad_composition);
}

TEST_CASE("normalize_composition is idempotent and scale invariant") {
  PhaseNamesPtr names = names_of({"a", "b", "c", "d"});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> raw(4);
    for (double& v : raw) v = unif(rng);
    if (raw[0] + raw[1] + raw[2] + raw[3] == 0.0) raw[0] = 1.0;
    const Composition once = normalize_composition(raw, names);
    const Composition twice = normalize_composition(once.fractions(), names);
    const double c = unif(rng) + 0.01;
    std::vector<double> scaled = raw;
    for (double& v : scaled) v *= c;
    const Composition from_scaled = normalize_composition(scaled, names);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs(once[j] - twice[j]) <= 1e-12);
      CHECK(std::abs(once[j] - from_scaled[j]) <= 1e-12);
    }
  }
}

TEST_CASE("composition constructor enforces the simplex") {
  PhaseNamesPtr ab = names_of({"a", "b"});
  CHECK_NOTHROW(Composition({0.5, 0.5}, ab));
  CHECK(code_of([&] { Composition({0.5, 0.6}, ab); }) == errc::bad_composition);
  CHECK(code_of([&] { Composition({-0.1, 1.1}, ab); }) == errc::bad_composition);
  CHECK(code_of([&] { Composition({0.5, 0.25, 0.25}, ab); }) == errc::bad_composition);
}

TEST_CASE("validate_dataset accepts near-one sums and rejects the rest") {
  GridPtr grid = grid_of({1.0, 2.0, 3.0, 4.0, 5.0});
  PhaseNamesPtr names = names_of({"a", "b"});
  std::vector<Spectrum> spectra = {Spectrum(grid, {1, 0, 0, 0, 0}),
                                   Spectrum(grid, {0, 1, 0, 0, 0}),
                                   Spectrum(grid, {0, 0, 1, 0, 0})};

  SUBCASE("three valid samples pass through") {
    Dataset ds = validate_dataset(spectra, {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}}, grid, names);
    CHECK(ds.sample_count() == 3);
    CHECK(ds.phase_count() == 2);
    CHECK_NOTHROW(ds.revalidate());
  }

  SUBCASE("sum 1.1 is rejected") {
    CHECK(code_of([&] {
            validate_dataset(spectra, {{1.0, 0.0}, {0.5, 0.6}, {0.5, 0.5}}, grid, names);
          }) == errc::bad_composition);
  }

  SUBCASE("rounding-level sums are renormalized") {
    Dataset ds = validate_dataset(spectra, {{1.0, 0.0}, {0.3, 0.7 + 5e-7}, {0.5, 0.5}}, grid,
                                  names);
    double sum = 0.0;
    for (double f : ds.label(1).fractions()) sum += f;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }

  SUBCASE("negative fraction is rejected") {
    CHECK(code_of([&] {
            validate_dataset(spectra, {{1.0, 0.0}, {-0.2, 1.2}, {0.5, 0.5}}, grid, names);
          }) == errc::bad_composition);
  }

  SUBCASE("foreign grid is rejected") {
    GridPtr other = grid_of({1.0, 2.0, 3.0, 4.0, 5.5});
    std::vector<Spectrum> bad = spectra;
    bad[2] = Spectrum(other, {0, 0, 1, 0, 0});
    CHECK(code_of([&] {
            validate_dataset(bad, {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}}, grid, names);
          }) == errc::grid_mismatch);
  }
}

TEST_CASE("dataset without_sample drops exactly one sample") {
  GridPtr grid = grid_of({1.0, 2.0});
  PhaseNamesPtr names = names_of({"a", "b"});
  std::vector<Spectrum> spectra = {Spectrum(grid, {1, 0}), Spectrum(grid, {0, 1}),
                                   Spectrum(grid, {1, 1})};
  std::vector<Composition> labels = {Composition({1.0, 0.0}, names),
                                     Composition({0.0, 1.0}, names),
                                     Composition({0.5, 0.5}, names)};
  Dataset ds = Dataset::from_parts(spectra, labels, grid, names);
  Dataset fold = ds.without_sample(1);
  CHECK(fold.sample_count() == 2);
  CHECK(fold.spectrum(1).intensities() == spectra[2].intensities());
  CHECK(fold.label(1) == labels[2]);
  CHECK_NOTHROW(fold.revalidate());
}

TEST_CASE("phase library rejects bad shapes and duplicate names") {
  GridPtr grid = grid_of({1.0, 2.0});
  CHECK_NOTHROW(PhaseLibrary(grid, names_of({"a", "b"}), {1, 2, 0, 0}));  // zero row is legal
  CHECK(code_of([&] { PhaseLibrary(grid, names_of({"a", "b"}), {1, 2, 3}); }) ==
        errc::dimension_mismatch);
  CHECK(code_of([&] { PhaseLibrary(grid, names_of({"a", "b"}), {1, 2, -3, 0}); }) ==
        errc::negative_intensity);
  CHECK_THROWS_AS(PhaseLibrary(grid, names_of({"a", "a"}), {1, 2, 3, 4}), std::invalid_argument);
}
