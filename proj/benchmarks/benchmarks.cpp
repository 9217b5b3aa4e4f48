#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "plucase/classify.hpp"
#include "plucase/prioritize.hpp"
#include "plucase/rucm.hpp"
#include "plucase/scenario.hpp"
#include "plucase/trace.hpp"

namespace {

using namespace plucase;

std::string spec_text(int use_cases) {
  std::ostringstream out;
  for (int u = 0; u < use_cases; ++u) {
    out << "USE CASE Operate Unit " << u << "\n";
    out << "Precondition: The unit " << u << " is powered.\n\n";
    out << "1.1 Basic Flow\n";
    out << "1. The operator SENDS the command TO the system.\n";
    out << "2. The system VALIDATES THAT the command checksum is valid.\n";
    out << "3. The system VALIDATES THAT the unit state is ready.\n";
    out << "4. The system computes the actuation plan.\n";
    out << "5. The system SENDS the actuation result TO the operator.\n\n";
    out << "1.2 Specific Alternative Flow (SAF1)\n";
    out << "RFS 2\n";
    out << "1. The system SENDS the checksum error TO the operator.\n";
    out << "2. ABORT.\n\n";
    out << "1.3 Specific Alternative Flow (SAF2)\n";
    out << "RFS 3\n";
    out << "1. The system queues the command for retry.\n\n";
    out << "1.4 Bounded Alternative Flow (BAF1)\n";
    out << "RFS 1-4\n";
    out << "IF the supply voltage drops THEN\n";
    out << "1. ABORT.\n";
    out << "ENDIF\n\n";
  }
  return out.str();
}

std::string branchy_text(int conditions) {
  std::ostringstream out;
  out << "USE CASE Drive Sequence\n\n1.1 Basic Flow\n";
  out << "1. The operator SENDS the start request TO the system.\n";
  for (int c = 0; c < conditions; ++c)
    out << c + 2 << ". The system VALIDATES THAT stage " << c
        << " reports nominal.\n";
  out << conditions + 2 << ". The system SENDS the completion report TO the "
      << "operator.\n\n";
  for (int c = 0; c < conditions; ++c) {
    out << "1." << c + 2 << " Specific Alternative Flow (SAF" << c + 1
        << ")\n";
    out << "RFS " << c + 2 << "\n";
    if (c % 2 == 0) {
      out << "1. The system logs the stage " << c << " fault.\n";
      out << "2. ABORT.\n\n";
    } else {
      out << "1. The system recalibrates stage " << c << ".\n\n";
    }
  }
  return out.str();
}

std::vector<prioritize::TrainingRow> training_rows(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> v(0, 5), s(1, 15), fp(0, 3), fv(0, 6);
  std::bernoulli_distribution r(0.4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<prioritize::TrainingRow> rows(n);
  for (int i = 0; i < n; ++i) {
    auto& row = rows[i];
    row.product_id = "P" + std::to_string(i % 5 + 1);
    row.version_id = "V" + std::to_string(i % 3 + 1);
    row.test_id = "t" + std::to_string(i);
    row.variability = v(rng);
    row.size = s(rng);
    row.retestable = r(rng) ? 1 : 0;
    row.failed_products = fp(rng);
    row.failed_versions = fv(rng);
    double eta = -2.0 + 0.5 * row.variability + 0.1 * row.size +
                 0.3 * row.failed_versions + 0.8 * row.retestable;
    row.fails = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
  }
  return rows;
}

void BM_ParseSpecification(benchmark::State& state) {
  std::string text = spec_text(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto doc = rucm::parse_specification(text);
    benchmark::DoNotOptimize(doc);
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_ParseSpecification)->Arg(4)->Arg(16)->Arg(64);

void BM_SerializeSpecification(benchmark::State& state) {
  auto doc = rucm::parse_specification(spec_text(16));
  for (auto _ : state) {
    auto text = rucm::serialize_specification(doc);
    benchmark::DoNotOptimize(text);
  }
}
BENCHMARK(BM_SerializeSpecification);

void BM_EnumerateDocument(benchmark::State& state) {
  auto doc =
      rucm::parse_specification(branchy_text(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    auto scenarios = scenario::enumerate_document(doc);
    benchmark::DoNotOptimize(scenarios);
  }
}
BENCHMARK(BM_EnumerateDocument)->Arg(3)->Arg(6)->Arg(9);

void BM_ClassifyAnalyze(benchmark::State& state) {
  auto old_doc = rucm::parse_specification(branchy_text(6));
  std::string changed = branchy_text(6);
  auto pos = changed.find("recalibrates stage 1");
  changed.replace(pos, 20, "realigns stage 1 after the fault");
  auto new_doc = rucm::parse_specification(changed);
  auto scenarios = scenario::enumerate_document(old_doc);
  trace::MatchResult matches;
  for (size_t i = 0; i < scenarios.size(); ++i) {
    std::string test = "t" + std::to_string(i + 1);
    matches.test_to_scenario[test] = scenarios[i].id;
    matches.scenario_to_tests[scenarios[i].id] = {test};
  }
  for (auto _ : state) {
    auto analysis = classify::analyze(old_doc, new_doc, scenarios, matches);
    benchmark::DoNotOptimize(analysis);
  }
}
BENCHMARK(BM_ClassifyAnalyze);

void BM_FitModel(benchmark::State& state) {
  auto rows = training_rows(static_cast<int>(state.range(0)), 20240229);
  std::vector<std::string> factors(
      prioritize::kFactorNames,
      prioritize::kFactorNames + prioritize::kFactorCount);
  for (auto _ : state) {
    auto model = prioritize::fit_model(rows, factors);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_FitModel)->Arg(200)->Arg(2000);

}  // namespace
