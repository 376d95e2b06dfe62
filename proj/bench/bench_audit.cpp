// Times the blocking audit and the batch runner, serial against parallel.
// Usage: rrc_bench [students] [replicas]

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <fmt/core.h>

#include "rrc/blocking.hpp"
#include "rrc/generator.hpp"
#include "rrc/harness.hpp"
#include "rrc/mechanisms.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace rrc;

namespace {

template <class F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int students = argc > 1 ? std::atoi(argv[1]) : 3000;
  const int replicas = argc > 2 ? std::atoi(argv[2]) : 20;
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif

  GenConfig g;
  g.n_students = students;
  g.n_colleges = 20;
  g.seed = 11;
  const Market m = generate_market(g);
  const Matching mu = run_rsd(m, 3).matching;

  BlockingReport serial;
  BlockingReport parallel;
  const double ts = seconds([&] { serial = audit_serial(m, mu); });
  const double tp = seconds([&] { parallel = audit(m, mu, threads); });
  if (!(serial == parallel)) {
    std::cerr << "serial and parallel audits disagree\n";
    return 1;
  }
  fmt::print("audit  {} students: serial {:.4f}s, {} threads {:.4f}s, speedup {:.2f}\n", students,
             ts, threads, tp, ts / tp);

  ExperimentConfig e;
  e.name = "bench";
  e.replicas = replicas;
  e.master_seed = 5;
  e.mechanisms = {std::begin(kAllMechanisms), std::end(kAllMechanisms)};
  Regime regime;
  regime.label = "none";
  regime.config.n_students = 100;
  regime.config.n_colleges = 10;
  e.regimes = {regime};
  const auto markets = generate_batch(e, threads);
  double tb1 = 0.0;
  double tbn = 0.0;
  std::vector<RunResult> one;
  std::vector<RunResult> many;
  tb1 = seconds([&] { one = run_batch(markets, e.mechanisms, e.master_seed, 1); });
  tbn = seconds([&] { many = run_batch(markets, e.mechanisms, e.master_seed, threads); });
  for (std::size_t i = 0; i < one.size(); ++i) {
    if (!(one[i].counts == many[i].counts)) {
      std::cerr << "batch results depend on the thread count\n";
      return 1;
    }
  }
  fmt::print("batch  {} runs: 1 thread {:.4f}s, {} threads {:.4f}s, speedup {:.2f}\n", one.size(),
             tb1, threads, tbn, tb1 / tbn);
}
