#include "unmix/validation.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace unmix {

namespace {

struct FoldOutput {
  Composition prediction;
  FitTrace fit_trace;
  FitTrace inference_trace;
};

FoldOutput run_fold(const Dataset& dataset, const SolverConfig& config, std::size_t held_out) {
  const Dataset training = dataset.without_sample(held_out);
  FitResult fit = fit_phase_library(training, config);
  EstimateResult estimate = estimate_composition(dataset.spectrum(held_out), fit.library, config);
  return FoldOutput{std::move(estimate.composition), std::move(fit.trace),
                    std::move(estimate.trace)};
}

}  // namespace

CvResult loocv(const Dataset& dataset, const SolverConfig& config, int jobs) {
  const std::size_t n = dataset.sample_count();
  const std::size_t m = dataset.phase_count();
  if (n < 2) {
    raise(errc::empty_input, "leave-one-out needs at least two samples");
  }
  if (jobs < 1) throw std::invalid_argument("loocv: jobs must be >= 1");

  // Every phase must stay observed when any single sample is removed; a phase
  // carried by exactly one sample vanishes from that sample's fold.
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t carriers = 0;
    std::size_t last_carrier = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (dataset.label(s)[j] > 0.0) {
        ++carriers;
        last_carrier = s;
      }
    }
    if (carriers == 0) {
      raise(errc::unobserved_phase,
            "phase " + (*dataset.phase_names())[j] + " appears in no sample");
    }
    if (carriers == 1) {
      raise(errc::phase_dropout, "phase " + (*dataset.phase_names())[j] +
                                     " vanishes from the training split of fold " +
                                     std::to_string(last_carrier));
    }
  }

  const auto started = std::chrono::steady_clock::now();

  std::vector<std::optional<FoldOutput>> outputs(n);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t s = 0; s < n; ++s) outputs[s] = run_fold(dataset, config, s);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t s = next.fetch_add(1);
          if (s >= n) return;
          try {
            outputs[s] = run_fold(dataset, config, s);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  CvResult result;
  result.fold_predictions.reserve(n);
  result.per_fold_traces.reserve(n);
  result.inference_traces.reserve(n);
  std::vector<Composition> predictions;
  predictions.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    FoldOutput& out = *outputs[s];
    predictions.push_back(out.prediction);
    result.fold_predictions.emplace_back(s, std::move(out.prediction));
    result.per_fold_traces.push_back(std::move(out.fit_trace));
    result.inference_traces.push_back(std::move(out.inference_trace));
  }
  result.report = evaluate(dataset.labels(), predictions);
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

EvalReport resubstitution_eval(const Dataset& dataset, const SolverConfig& config) {
  FitResult fit = fit_phase_library(dataset, config);
  std::vector<Composition> predictions;
  predictions.reserve(dataset.sample_count());
  for (std::size_t s = 0; s < dataset.sample_count(); ++s) {
    predictions.push_back(estimate_composition(dataset.spectrum(s), fit.library, config).composition);
  }
  return evaluate(dataset.labels(), predictions);
}

}  // namespace unmix
