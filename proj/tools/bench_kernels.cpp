// Times the OpenMP kernels against their serial references and checks that
// both produce identical results.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "argprobe/kernels.hpp"

using namespace argprobe;

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto start = clock_type::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto stop = clock_type::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

std::vector<double> random_vec(size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void report(const char* name, double serial_ms, double parallel_ms,
            double diff) {
  std::printf("%-20s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   max|diff| %g\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
  const int m = 256, k = 256, n = 512;
  const int reps = 20;
  const auto a = random_vec(size_t(m) * k, 1);
  const auto b = random_vec(size_t(k) * n, 2);
  const auto bt = random_vec(size_t(n) * k, 3);

  {
    std::vector<double> cs(size_t(m) * n), cp(size_t(m) * n);
    const double ts = time_ms([&] { kern::matmul_serial(a.data(), b.data(), cs.data(), m, k, n); }, reps);
    const double tp = time_ms([&] { kern::matmul(a.data(), b.data(), cp.data(), m, k, n); }, reps);
    report("matmul", ts, tp, max_diff(cs, cp));
  }
  {
    std::vector<double> cs(size_t(m) * n), cp(size_t(m) * n);
    const double ts = time_ms([&] { kern::matmul_transb_serial(a.data(), bt.data(), cs.data(), m, k, n); }, reps);
    const double tp = time_ms([&] { kern::matmul_transb(a.data(), bt.data(), cp.data(), m, k, n); }, reps);
    report("matmul_transb", ts, tp, max_diff(cs, cp));
  }
  {
    const auto g = random_vec(size_t(m) * n, 4);
    std::vector<double> cs(size_t(k) * n, 0.0), cp(size_t(k) * n, 0.0);
    const double ts = time_ms([&] {
      std::fill(cs.begin(), cs.end(), 0.0);
      kern::matmul_transa_acc_serial(a.data(), g.data(), cs.data(), m, k, n);
    }, reps);
    const double tp = time_ms([&] {
      std::fill(cp.begin(), cp.end(), 0.0);
      kern::matmul_transa_acc(a.data(), g.data(), cp.data(), m, k, n);
    }, reps);
    report("matmul_transa_acc", ts, tp, max_diff(cs, cp));
  }
  {
    const int rows = 4096, cols = 512;
    const auto x0 = random_vec(size_t(rows) * cols, 5);
    std::vector<double> xs, xp;
    const double ts = time_ms([&] { xs = x0; kern::softmax_rows_serial(xs.data(), rows, cols); }, reps);
    const double tp = time_ms([&] { xp = x0; kern::softmax_rows(xp.data(), rows, cols); }, reps);
    report("softmax_rows", ts, tp, max_diff(xs, xp));
  }
  {
    const int rows = 4096, cols = 512;
    const auto x0 = random_vec(size_t(rows) * cols, 6);
    std::vector<double> xs, xp;
    const double ts = time_ms([&] { xs = x0; kern::log_softmax_rows_serial(xs.data(), rows, cols); }, reps);
    const double tp = time_ms([&] { xp = x0; kern::log_softmax_rows(xp.data(), rows, cols); }, reps);
    report("log_softmax_rows", ts, tp, max_diff(xs, xp));
  }
  return 0;
}
