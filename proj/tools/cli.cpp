#include "cli.hpp"

#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "plucase/classify.hpp"
#include "plucase/configure.hpp"
#include "plucase/decision.hpp"
#include "plucase/diagram.hpp"
#include "plucase/error.hpp"
#include "plucase/prioritize.hpp"
#include "plucase/report.hpp"
#include "plucase/rucm.hpp"
#include "plucase/scenario.hpp"
#include "plucase/text.hpp"
#include "plucase/trace.hpp"

namespace plucase::cli {
namespace {

struct Options {
  std::string pl_spec;
  std::string pl_diagram;
  std::vector<std::string> decisions;
  std::vector<std::string> previous;
  std::string new_product;
  std::vector<std::string> traces;
  std::string overrides;
  std::string history;
  std::string features;
  std::string ranking;
  double alpha = 0.05;
  std::string format = "json";
  std::string out;
};

void print_findings(const Findings& findings) {
  for (const auto& f : findings)
    std::cout << (f.severity == Finding::Severity::Warning ? "warning"
                                                           : "violation")
              << " [" << f.rule << "] " << f.message << "\n";
}

int exit_code(const Findings& findings) { return findings.empty() ? 0 : 1; }

std::string out_path(const Options& opt, const std::string& name) {
  std::filesystem::path dir = opt.out.empty() ? "." : opt.out;
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

// Decision models keyed by their embedded product id.
std::map<std::string, decision::DecisionModel> load_decision_pool(
    const std::vector<std::string>& files) {
  std::map<std::string, decision::DecisionModel> pool;
  for (const auto& file : files) {
    decision::DecisionModel m = decision::read_decisions(file);
    std::string id = m.product_id;
    if (!pool.emplace(id, std::move(m)).second)
      throw Error(ErrorCode::UsageError,
                  "two decision files for product '" + id + "'");
  }
  return pool;
}

const decision::DecisionModel& pick(
    const std::map<std::string, decision::DecisionModel>& pool,
    const std::string& product_id) {
  auto it = pool.find(product_id);
  if (it == pool.end())
    throw Error(ErrorCode::UsageError,
                "no decisions given for product '" + product_id + "'");
  return it->second;
}

// --traces values are either PRODUCT=path or, with a single previous
// product, a bare path.
std::map<std::string, std::string> traces_by_product(const Options& opt) {
  std::map<std::string, std::string> by_product;
  std::set<std::string> known(opt.previous.begin(), opt.previous.end());
  for (const auto& value : opt.traces) {
    size_t eq = value.find('=');
    if (eq != std::string::npos && known.count(value.substr(0, eq))) {
      by_product[value.substr(0, eq)] = value.substr(eq + 1);
    } else if (opt.previous.size() == 1) {
      by_product[opt.previous.front()] = value;
    } else {
      throw Error(ErrorCode::UsageError,
                  "--traces needs the PRODUCT=path form when several "
                  "previous products are given: '" +
                      value + "'");
    }
  }
  for (const auto& id : opt.previous)
    if (!by_product.count(id))
      throw Error(ErrorCode::UsageError,
                  "no traces given for product '" + id + "'");
  return by_product;
}

int cmd_validate(const Options& opt) {
  rucm::UseCaseDocument spec = rucm::read_specification(opt.pl_spec);
  Findings findings = rucm::validate_document(spec);

  diagram::PLDiagram dia;
  bool has_diagram = !opt.pl_diagram.empty();
  if (has_diagram) {
    dia = diagram::read_diagram(opt.pl_diagram);
    Findings crossed = diagram::cross_check(dia, spec);
    findings.insert(findings.end(), crossed.begin(), crossed.end());
  }

  if (!opt.decisions.empty() && !has_diagram)
    throw Error(ErrorCode::UsageError,
                "validating decisions needs --pl-diagram");
  for (const auto& file : opt.decisions) {
    decision::DecisionModel m = decision::read_decisions(file);
    for (Finding f : decision::validate_decisions(m, dia, spec)) {
      f.message = m.product_id + ": " + f.message;
      findings.push_back(std::move(f));
    }
  }

  print_findings(findings);
  return exit_code(findings);
}

int cmd_configure(const Options& opt) {
  rucm::UseCaseDocument pl = rucm::read_specification(opt.pl_spec);
  diagram::PLDiagram dia = diagram::read_diagram(opt.pl_diagram);
  decision::DecisionModel m = decision::read_decisions(opt.decisions.front());

  diagram::PLDiagram ps_diagram = configure::generate_ps_diagram(dia, pl, m);
  configure::SpecResult result = configure::generate_ps_specification(pl, dia, m);

  text::write_text_file(out_path(opt, m.product_id + ".rucm"),
                        rucm::serialize_specification(result.spec));
  text::write_text_file(out_path(opt, m.product_id + ".diagram.json"),
                        diagram::serialize_diagram(ps_diagram));

  print_findings(result.warnings);
  return exit_code(result.warnings);
}

int cmd_diff(const Options& opt) {
  decision::DecisionModel m_old, m_new;
  if (!opt.previous.empty() || !opt.new_product.empty()) {
    if (opt.previous.size() != 1 || opt.new_product.empty())
      throw Error(ErrorCode::UsageError,
                  "diff needs --previous and --new together");
    auto pool = load_decision_pool(opt.decisions);
    m_old = pick(pool, opt.previous.front());
    m_new = pick(pool, opt.new_product);
  } else if (opt.decisions.size() == 2) {
    m_old = decision::read_decisions(opt.decisions[0]);
    m_new = decision::read_decisions(opt.decisions[1]);
  } else {
    throw Error(ErrorCode::UsageError,
                "diff needs two --decisions files, or a pool with "
                "--previous and --new");
  }

  decision::ChangeSet changes = decision::calculate_changes(m_old, m_new);
  std::string json_text = decision::serialize_change_set(changes);
  if (opt.out.empty())
    std::cout << json_text;
  else
    text::write_text_file(out_path(opt, "changes.json"), json_text);
  return 0;
}

report::ProductResult classify_product(
    const rucm::UseCaseDocument& pl, const diagram::PLDiagram& dia,
    const decision::DecisionModel& m_old,
    const rucm::UseCaseDocument& new_spec, const std::string& traces_path,
    const std::map<std::string, std::string>& overrides) {
  configure::SpecResult old_result =
      configure::generate_ps_specification(pl, dia, m_old);
  std::vector<scenario::Scenario> old_scenarios =
      scenario::enumerate_document(old_result.spec);
  std::vector<trace::TracedTest> traced = trace::read_traces(traces_path);
  trace::MatchResult matches =
      trace::match_tests(old_scenarios, traced, overrides);
  classify::Analysis analysis =
      classify::analyze(old_result.spec, new_spec, old_scenarios, matches);
  analysis.findings.insert(analysis.findings.end(),
                           old_result.warnings.begin(),
                           old_result.warnings.end());

  report::ProductResult result;
  result.product_id = m_old.product_id;
  result.created_on = m_old.created_on;
  result.analysis = std::move(analysis);
  result.scenarios = std::move(old_scenarios);
  return result;
}

int write_impact(const Options& opt, const report::ImpactReport& rep) {
  if (opt.format == "json")
    text::write_text_file(out_path(opt, "impact.json"), report::to_json(rep));
  else if (opt.format == "csv")
    text::write_text_file(out_path(opt, "impact.csv"), report::to_csv(rep));
  else
    text::write_text_file(out_path(opt, "impact.html"), report::to_html(rep));
  text::write_text_file(out_path(opt, "features.csv"),
                        report::features_csv(rep));
  print_findings(rep.findings);
  return exit_code(rep.findings);
}

int cmd_classify(const Options& opt) {
  rucm::UseCaseDocument pl = rucm::read_specification(opt.pl_spec);
  diagram::PLDiagram dia = diagram::read_diagram(opt.pl_diagram);
  auto pool = load_decision_pool(opt.decisions);
  auto traces = traces_by_product(opt);
  std::map<std::string, std::string> overrides;
  if (!opt.overrides.empty()) overrides = trace::read_overrides(opt.overrides);

  configure::SpecResult new_result =
      configure::generate_ps_specification(pl, dia, pick(pool, opt.new_product));

  std::vector<report::ProductResult> results;
  results.push_back(classify_product(pl, dia, pick(pool, opt.previous.front()),
                                     new_result.spec,
                                     traces.at(opt.previous.front()),
                                     overrides));
  report::ImpactReport rep = report::aggregate(opt.new_product, results);
  rep.findings.insert(rep.findings.end(), new_result.warnings.begin(),
                      new_result.warnings.end());
  return write_impact(opt, rep);
}

int cmd_report(const Options& opt) {
  rucm::UseCaseDocument pl = rucm::read_specification(opt.pl_spec);
  diagram::PLDiagram dia = diagram::read_diagram(opt.pl_diagram);
  auto pool = load_decision_pool(opt.decisions);
  auto traces = traces_by_product(opt);
  std::map<std::string, std::string> overrides;
  if (!opt.overrides.empty()) overrides = trace::read_overrides(opt.overrides);

  configure::SpecResult new_result =
      configure::generate_ps_specification(pl, dia, pick(pool, opt.new_product));

  // Previous products are independent; classify them in parallel, the
  // result order stays the --previous order.
  std::vector<std::future<report::ProductResult>> futures;
  for (const auto& id : opt.previous) {
    const decision::DecisionModel& m_old = pick(pool, id);
    const std::string& traces_path = traces.at(id);
    futures.push_back(std::async(std::launch::async, [&pl, &dia, &m_old,
                                                      &new_result, &traces_path,
                                                      &overrides] {
      return classify_product(pl, dia, m_old, new_result.spec, traces_path,
                              overrides);
    }));
  }
  std::vector<report::ProductResult> results;
  for (auto& f : futures) results.push_back(f.get());

  report::ImpactReport rep = report::aggregate(opt.new_product, results);
  rep.findings.insert(rep.findings.end(), new_result.warnings.begin(),
                      new_result.warnings.end());
  return write_impact(opt, rep);
}

int cmd_prioritize(const Options& opt) {
  auto history = prioritize::read_history(opt.history);
  auto features = prioritize::read_features(opt.features);
  prioritize::Prioritization result =
      prioritize::prioritize(history, features, opt.new_product, opt.alpha);

  text::write_text_file(out_path(opt, "ranking.csv"),
                        prioritize::ranking_csv(result.ranking));
  if (result.heuristic) {
    nlohmann::json j;
    j["heuristic"] = true;
    j["warnings"] = nlohmann::json::array();
    for (const auto& w : result.warnings)
      j["warnings"].push_back({{"rule", w.rule}, {"message", w.message}});
    text::write_text_file(out_path(opt, "model.json"), j.dump(2) + "\n");
  } else {
    text::write_text_file(out_path(opt, "model.json"),
                          prioritize::model_json(result.models));
  }

  print_findings(result.warnings);
  return exit_code(result.warnings);
}

int cmd_evaluate(const Options& opt) {
  auto ranked = prioritize::parse_ranking(text::read_text_file(opt.ranking));
  auto history = prioritize::read_history(opt.history);

  std::vector<std::string> ids;
  for (const auto& c : ranked) ids.push_back(c.test_id);
  std::set<std::string> failing;
  for (const auto& h : history)
    if (h.product_id == opt.new_product && h.failed) failing.insert(h.test_id);

  try {
    prioritize::Metrics metrics = prioritize::evaluate_ranking(ids, failing);
    text::write_text_file(out_path(opt, "metrics.json"),
                          prioritize::metrics_json(metrics));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoFailures) throw;
    nlohmann::json j;
    j["not_applicable"] = true;
    j["reason"] = "no ranked test case failed";
    text::write_text_file(out_path(opt, "metrics.json"), j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Use case driven test impact analysis and prioritization "
               "for product lines"};
  app.require_subcommand(1);
  app.set_config("--config", "plucase.toml",
                 "Config file with default flag values (flags win)");

  Options opt;

  auto add_artifacts = [&](CLI::App* cmd, bool diagram_required) {
    cmd->add_option("--pl-spec", opt.pl_spec,
                    "Product line use case specification (.rucm)")
        ->required();
    auto* dia = cmd->add_option("--pl-diagram", opt.pl_diagram,
                                "Product line use case diagram (JSON)");
    if (diagram_required) dia->required();
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out, "Output directory (default: .)");
  };
  auto add_impact = [&](CLI::App* cmd) {
    cmd->add_option("--decisions", opt.decisions,
                    "Decision model files, keyed by their product id")
        ->required();
    cmd->add_option("--new", opt.new_product, "Product under construction")
        ->required();
    cmd->add_option("--traces", opt.traces,
                    "Trace file (PRODUCT=path, bare path with one product)")
        ->required();
    cmd->add_option("--overrides", opt.overrides,
                    "Manual test-to-scenario assignments (CSV)");
    cmd->add_option("--format", opt.format, "Impact report format")
        ->check(CLI::IsMember({"json", "csv", "html"}));
    add_out(cmd);
  };

  CLI::App* validate =
      app.add_subcommand("validate", "Check specification, diagram and "
                                     "decision models for consistency");
  add_artifacts(validate, false);
  validate->add_option("--decisions", opt.decisions,
                       "Decision model files to validate");

  CLI::App* configure = app.add_subcommand(
      "configure", "Generate the product specific specification and diagram");
  add_artifacts(configure, true);
  configure->add_option("--decisions", opt.decisions, "Decision model file")
      ->required()
      ->expected(1);
  add_out(configure);

  CLI::App* diff = app.add_subcommand(
      "diff", "Decision changes between two products as JSON");
  diff->add_option("--decisions", opt.decisions,
                   "Two decision files (old, new), or a pool with "
                   "--previous/--new")
      ->required();
  diff->add_option("--previous", opt.previous, "Old product id");
  diff->add_option("--new", opt.new_product, "New product id");
  add_out(diff);

  CLI::App* classify = app.add_subcommand(
      "classify", "Classify one previous product's tests against a new one");
  add_artifacts(classify, true);
  classify->add_option("--previous", opt.previous, "Previous product id")
      ->required()
      ->expected(1);
  add_impact(classify);

  CLI::App* report = app.add_subcommand(
      "report", "Whole line impact report over several previous products");
  add_artifacts(report, true);
  report->add_option("--previous", opt.previous, "Previous product ids")
      ->required();
  add_impact(report);

  CLI::App* prioritize = app.add_subcommand(
      "prioritize", "Train on the execution history and rank the new "
                    "product's test cases");
  prioritize->add_option("--history", opt.history, "Execution history CSV")
      ->required();
  prioritize->add_option("--features", opt.features, "Feature rows CSV")
      ->required();
  prioritize->add_option("--new", opt.new_product, "Product to rank")
      ->required();
  prioritize->add_option("--alpha", opt.alpha,
                         "Wald significance threshold (default 0.05)")
      ->check(CLI::Range(0.0, 1.0));
  add_out(prioritize);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Ranking quality metrics against the observed failures");
  evaluate->add_option("--ranking", opt.ranking, "ranking.csv to score")
      ->required();
  evaluate->add_option("--history", opt.history, "Execution history CSV")
      ->required();
  evaluate->add_option("--new", opt.new_product, "Product the ranking is for")
      ->required();
  add_out(evaluate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(opt);
    if (configure->parsed()) return cmd_configure(opt);
    if (diff->parsed()) return cmd_diff(opt);
    if (classify->parsed()) return cmd_classify(opt);
    if (report->parsed()) return cmd_report(opt);
    if (prioritize->parsed()) return cmd_prioritize(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace plucase::cli
