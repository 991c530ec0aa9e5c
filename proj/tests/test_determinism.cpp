#include <doctest.h>

#include <cstring>

#include "pdquad/experiments.hpp"

using namespace pdq;

namespace {

template <class T>
bool bitwise_equal(std::span<const T> a, std::span<const T> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
}

bool same_rows(const std::vector<ConvergenceRow>& a, const std::vector<ConvergenceRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::memcmp(&a[i].l2, &b[i].l2, sizeof(double)) || std::memcmp(&a[i].sup, &b[i].sup, sizeof(double)))
      return false;
  return true;
}

}  // namespace

TEST_CASE("weights do not depend on the thread count") {
  DiscretizationOptions one;
  one.order = 3;
  DiscretizationOptions four = one;
  four.exec.threads = 4;
  const Domain2D box = periodic_box(24, one.effective_ratio());
  const Discretization a = discretize(box, 24, 24, one);
  const Discretization b = discretize(box, 24, 24, four);
  CHECK(bitwise_equal(a.rule.weights(), b.rule.weights()));
  CHECK(bitwise_equal(a.cloud.positions(), b.cloud.positions()));
}

TEST_CASE("convergence runs repeat bitwise") {
  const std::vector<int> res{12, 16};
  DiscretizationOptions opt;
  opt.ensemble = 2;
  const ConvergenceResult first = run_convergence(ManufacturedCase::local_trig, res, opt);
  const ConvergenceResult second = run_convergence(ManufacturedCase::local_trig, res, opt);
  opt.exec.threads = 3;
  const ConvergenceResult threaded = run_convergence(ManufacturedCase::local_trig, res, opt);
  CHECK(same_rows(first.truncation, second.truncation));
  CHECK(same_rows(first.solution, second.solution));
  CHECK(same_rows(first.truncation, threaded.truncation));
  CHECK(same_rows(first.solution, threaded.solution));
}

TEST_CASE("dynamic fracture repeats bitwise") {
  KalthoffOptions k;
  k.nx = 40;
  k.ny = 20;
  k.steps = 6;
  k.dt = 2e-6;
  k.critical_strain = 2e-3;
  DiscretizationOptions opt;
  opt.order = 2;
  opt.ratio = 3.0;

  auto run = [&](unsigned threads) {
    DiscretizationOptions o = opt;
    o.exec.threads = threads;
    std::vector<Vec2> last;
    const KalthoffResult r = run_kalthoff(k, o, [&](const SimulationState& s, const StepReport&) { last = s.u; });
    return std::pair{r, last};
  };
  const auto [r1, u1] = run(1);
  const auto [r2, u2] = run(4);
  CHECK(r1.broken_dynamic == r2.broken_dynamic);
  CHECK(r1.broken_preprocess == r2.broken_preprocess);
  CHECK(bitwise_equal(std::span<const Vec2>(u1), std::span<const Vec2>(u2)));
  CHECK_FALSE(u1.empty());
}
