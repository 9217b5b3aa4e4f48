#include "plucase/prioritize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include <Eigen/Dense>

#include "json.hpp"
#include "plucase/csv.hpp"
#include "plucase/stats.hpp"
#include "plucase/text.hpp"

namespace plucase::prioritize {
namespace {

using nlohmann::json;

int parse_int(const std::string& field, const char* what, int line) {
  try {
    size_t used = 0;
    int value = std::stoi(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError,
                std::string(what) + " must be an integer: '" + field + "'",
                line);
  }
}

// Compares ids digit-run aware, so NEW#2 sorts before NEW#10.
bool natural_less(const std::string& a, const std::string& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) &&
        std::isdigit(static_cast<unsigned char>(b[j]))) {
      size_t ei = i, ej = j;
      while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei])))
        ++ei;
      while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej])))
        ++ej;
      std::string da = a.substr(i, ei - i), db = b.substr(j, ej - j);
      da.erase(0, da.find_first_not_of('0'));
      db.erase(0, db.find_first_not_of('0'));
      if (da.size() != db.size()) return da.size() < db.size();
      if (da != db) return da < db;
      i = ei;
      j = ej;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() < b.size();
}

double factor_value(const TrainingRow& row, const std::string& factor) {
  if (factor == "intercept") return 1.0;
  if (factor == "V") return row.variability;
  if (factor == "S") return row.size;
  if (factor == "FP") return row.failed_products;
  if (factor == "FV") return row.failed_versions;
  if (factor == "R") return row.retestable;
  throw Error(ErrorCode::UsageError, "unknown factor '" + factor + "'");
}

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

double deviance_of(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double m = std::clamp(mu(i), 1e-12, 1.0 - 1e-12);
    dev += y(i) * std::log(m) + (1.0 - y(i)) * std::log(1.0 - m);
  }
  return -2.0 * dev;
}

std::string format_probability(double p) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6f", p);
  return buffer;
}

json model_to_json(const Model& m) {
  json j;
  j["factors"] = m.factors;
  j["coefficients"] = json::object();
  j["standard_errors"] = json::object();
  j["wald_z"] = json::object();
  j["p_values"] = json::object();
  for (size_t k = 0; k < m.factors.size(); ++k) {
    const std::string& f = m.factors[k];
    j["coefficients"][f] = m.coefficients[k];
    j["standard_errors"][f] = m.standard_errors[k];
    j["wald_z"][f] = m.wald_z[k];
    j["p_values"][f] = m.p_values[k];
  }
  j["converged"] = m.converged;
  j["deviance"] = m.deviance;
  j["iterations"] = m.iterations;
  return j;
}

}  // namespace

const char* const kFactorNames[kFactorCount] = {"intercept", "V",  "S",
                                                "FP",        "FV", "R"};

std::vector<HistoryRow> parse_history(const std::string& content) {
  csv::Table table = csv::parse(content);
  int c_product = table.column("product_id");
  int c_version = table.column("version_id");
  int c_test = table.column("test_id");
  int c_verdict = table.column("verdict");
  int c_timestamp = table.column("timestamp");
  if (c_product < 0 || c_version < 0 || c_test < 0 || c_verdict < 0)
    throw Error(
        ErrorCode::HistorySchemaError,
        "history needs columns product_id,version_id,test_id,verdict", 1);
  std::vector<HistoryRow> rows;
  std::string previous_timestamp;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    int line = static_cast<int>(r) + 2;
    if (c_timestamp >= 0) {
      std::string ts = text::trim(row[c_timestamp]);
      if (ts < previous_timestamp)
        throw Error(ErrorCode::HistorySchemaError,
                    "history rows out of chronological order at timestamp '" +
                        ts + "'",
                    line);
      previous_timestamp = ts;
    }
    HistoryRow h;
    h.product_id = text::trim(row[c_product]);
    h.version_id = text::trim(row[c_version]);
    h.test_id = text::trim(row[c_test]);
    std::string verdict = text::to_lower(text::trim(row[c_verdict]));
    if (h.product_id.empty() || h.version_id.empty() || h.test_id.empty())
      throw Error(ErrorCode::HistorySchemaError, "empty history field", line);
    if (verdict == "fail")
      h.failed = true;
    else if (verdict == "pass")
      h.failed = false;
    else
      throw Error(ErrorCode::HistorySchemaError,
                  "verdict must be pass or fail: '" + verdict + "'", line);
    rows.push_back(std::move(h));
  }
  return rows;
}

std::vector<HistoryRow> read_history(const std::string& path) {
  return parse_history(text::read_text_file(path));
}

std::vector<FeatureRecord> parse_features(const std::string& content) {
  csv::Table table = csv::parse(content);
  int c_product = table.column("product_id");
  int c_test = table.column("test_id");
  int c_v = table.column("V");
  int c_s = table.column("S");
  int c_r = table.column("R");
  int c_new = table.column("is_new_scenario");
  if (c_product < 0 || c_test < 0 || c_v < 0 || c_s < 0 || c_r < 0)
    throw Error(ErrorCode::SchemaError,
                "features need columns product_id,test_id,V,S,R", 1);
  std::vector<FeatureRecord> records;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    int line = static_cast<int>(r) + 2;
    FeatureRecord rec;
    rec.product_id = text::trim(row[c_product]);
    rec.test_id = text::trim(row[c_test]);
    if (rec.product_id.empty() || rec.test_id.empty())
      throw Error(ErrorCode::SchemaError, "empty feature field", line);
    rec.variability = parse_int(text::trim(row[c_v]), "V", line);
    rec.size = parse_int(text::trim(row[c_s]), "S", line);
    rec.retestable = parse_int(text::trim(row[c_r]), "R", line);
    if (c_new >= 0 && !text::trim(row[c_new]).empty())
      rec.is_new_scenario =
          parse_int(text::trim(row[c_new]), "is_new_scenario", line) != 0;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<FeatureRecord> read_features(const std::string& path) {
  return parse_features(text::read_text_file(path));
}

std::vector<TrainingRow> build_training_set(
    const std::vector<HistoryRow>& history,
    const std::vector<FeatureRecord>& features) {
  std::map<std::pair<std::string, std::string>, const FeatureRecord*> by_key;
  for (const auto& f : features) by_key[{f.product_id, f.test_id}] = &f;

  std::map<std::string, int> fail_count;
  std::map<std::string, std::set<std::string>> failed_in;
  std::vector<TrainingRow> rows;
  for (const auto& h : history) {
    auto it = by_key.find({h.product_id, h.test_id});
    if (it == by_key.end())
      throw Error(ErrorCode::UnknownTest,
                  "no feature record for test '" + h.test_id +
                      "' of product '" + h.product_id + "'");
    const FeatureRecord& f = *it->second;
    TrainingRow row;
    row.product_id = h.product_id;
    row.version_id = h.version_id;
    row.test_id = h.test_id;
    row.fails = h.failed ? 1 : 0;
    row.variability = f.variability;
    row.size = f.size;
    row.retestable = f.retestable;
    row.failed_versions = fail_count[h.test_id];
    int fp = 0;
    for (const auto& p : failed_in[h.test_id])
      if (p != h.product_id) ++fp;
    row.failed_products = fp;
    rows.push_back(std::move(row));
    if (h.failed) {
      fail_count[h.test_id] += 1;
      failed_in[h.test_id].insert(h.product_id);
    }
  }
  return rows;
}

double Model::predict(const TrainingRow& row) const {
  double eta = 0.0;
  for (size_t k = 0; k < factors.size(); ++k)
    eta += coefficients[k] * factor_value(row, factors[k]);
  return sigmoid(eta);
}

Model fit_model(const std::vector<TrainingRow>& rows,
                const std::vector<std::string>& factors, Findings* warnings) {
  if (rows.empty())
    throw Error(ErrorCode::EmptyInput, "empty training set");
  bool any_fail = false, any_pass = false;
  for (const auto& r : rows) (r.fails ? any_fail : any_pass) = true;
  if (!any_fail || !any_pass)
    throw Error(ErrorCode::ConstantOutcome,
                std::string("every training outcome is '") +
                    (any_fail ? "fail" : "pass") + "'");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(factors.size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = rows[i].fails;
    for (Eigen::Index j = 0; j < k; ++j)
      x(i, j) = factor_value(rows[i], factors[j]);
  }

  Model model;
  model.factors = factors;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double previous = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  Eigen::VectorXd mu(n), w(n);
  for (int it = 1; it <= 25; ++it) {
    iterations = it;
    Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = sigmoid(eta(i));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-10);
    }
    Eigen::VectorXd z = eta + (y - mu).cwiseQuotient(w);
    Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    beta = (xtw * x).ldlt().solve(xtw * z);
    Eigen::VectorXd eta_next = x * beta;
    Eigen::VectorXd mu_next(n);
    for (Eigen::Index i = 0; i < n; ++i) mu_next(i) = sigmoid(eta_next(i));
    double deviance = deviance_of(y, mu_next);
    if (std::abs(deviance - previous) < 1e-8) {
      converged = true;
      previous = deviance;
      break;
    }
    previous = deviance;
  }

  bool separated = false;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (std::abs(beta(j)) > 10.0) {
      beta(j) = std::clamp(beta(j), -10.0, 10.0);
      separated = true;
    }
  }
  if (separated) {
    converged = false;
    if (warnings)
      warnings->push_back(
          {Finding::Severity::Warning, "separation",
           "coefficients ran away (quasi-complete separation); clipped to "
           "[-10, 10] and flagged unconverged"});
  } else if (!converged && warnings) {
    warnings->push_back({Finding::Severity::Warning, "no-convergence",
                         "deviance did not settle within 25 iterations"});
  }

  Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < n; ++i) {
    mu(i) = sigmoid(eta(i));
    w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-10);
  }
  Eigen::MatrixXd information = x.transpose() * w.asDiagonal() * x;
  Eigen::MatrixXd covariance =
      information.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

  model.coefficients.resize(k);
  model.standard_errors.resize(k);
  model.wald_z.resize(k);
  model.p_values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    model.coefficients[j] = beta(j);
    double variance = covariance(j, j);
    double se = variance > 0 ? std::sqrt(variance) : 0.0;
    model.standard_errors[j] = se;
    double zval = se > 0 ? beta(j) / se : 0.0;
    model.wald_z[j] = zval;
    model.p_values[j] = se > 0 ? 2.0 * (1.0 - stats::normal_cdf(std::abs(zval)))
                               : 1.0;
  }
  model.converged = converged;
  model.deviance = deviance_of(y, mu);
  model.iterations = iterations;
  return model;
}

TrainedModels train(const std::vector<TrainingRow>& rows, double alpha) {
  TrainedModels out;
  out.alpha = alpha;
  std::vector<std::string> all(kFactorNames, kFactorNames + kFactorCount);
  out.full = fit_model(rows, all, &out.warnings);
  std::vector<std::string> kept{"intercept"};
  for (size_t k = 1; k < out.full.factors.size(); ++k)
    if (out.full.p_values[k] < alpha) kept.push_back(out.full.factors[k]);
  out.retained = fit_model(rows, kept, &out.warnings);
  return out;
}

std::string model_json(const TrainedModels& models) {
  json root;
  root["alpha"] = models.alpha;
  root["full"] = model_to_json(models.full);
  root["retained"] = model_to_json(models.retained);
  root["retained_factors"] = json::array();
  for (size_t k = 1; k < models.retained.factors.size(); ++k)
    root["retained_factors"].push_back(models.retained.factors[k]);
  root["warnings"] = json::array();
  for (const auto& w : models.warnings) {
    json j;
    j["rule"] = w.rule;
    j["message"] = w.message;
    root["warnings"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

Prioritization prioritize(const std::vector<HistoryRow>& history,
                          const std::vector<FeatureRecord>& features,
                          const std::string& new_product, double alpha) {
  Prioritization out;

  std::vector<HistoryRow> earlier;
  for (const auto& h : history)
    if (h.product_id != new_product) earlier.push_back(h);

  std::map<std::string, int> fail_count;
  std::map<std::string, std::set<std::string>> failed_in;
  for (const auto& h : earlier) {
    if (!h.failed) continue;
    fail_count[h.test_id] += 1;
    failed_in[h.test_id].insert(h.product_id);
  }

  for (const auto& f : features) {
    if (f.product_id != new_product) continue;
    Candidate c;
    c.test_id = f.test_id;
    c.variability = f.variability;
    c.size = f.size;
    c.retestable = f.retestable;
    c.is_new_scenario = f.is_new_scenario;
    auto fv = fail_count.find(f.test_id);
    c.failed_versions = fv == fail_count.end() ? 0 : fv->second;
    auto fp = failed_in.find(f.test_id);
    c.failed_products = fp == failed_in.end() ? 0 : static_cast<int>(fp->second.size());
    out.ranking.push_back(std::move(c));
  }
  if (out.ranking.empty())
    throw Error(ErrorCode::EmptyInput,
                "no feature records for product '" + new_product + "'");

  std::vector<TrainingRow> training = build_training_set(earlier, features);
  try {
    out.models = train(training, alpha);
    out.warnings = out.models.warnings;
    for (auto& c : out.ranking) {
      TrainingRow row;
      row.variability = c.variability;
      row.size = c.size;
      row.retestable = c.retestable;
      row.failed_products = c.failed_products;
      row.failed_versions = c.failed_versions;
      c.probability = out.models.retained.predict(row);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConstantOutcome) throw;
    out.heuristic = true;
    bool all_fail = !training.empty() && training.front().fails == 1;
    for (auto& c : out.ranking) c.probability = all_fail ? 1.0 : 0.0;
    out.warnings.push_back(
        {Finding::Severity::Warning, "constant-outcome",
         "every training outcome is identical; ranking falls back to the "
         "feature heuristic"});
  }

  std::sort(out.ranking.begin(), out.ranking.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.is_new_scenario != b.is_new_scenario)
                return a.is_new_scenario;
              if (a.is_new_scenario) return natural_less(a.test_id, b.test_id);
              if (out.heuristic) {
                if (a.retestable != b.retestable)
                  return a.retestable > b.retestable;
                if (a.variability != b.variability)
                  return a.variability > b.variability;
                if (a.size != b.size) return a.size > b.size;
                return a.test_id < b.test_id;
              }
              if (a.probability != b.probability)
                return a.probability > b.probability;
              if (a.failed_versions != b.failed_versions)
                return a.failed_versions > b.failed_versions;
              if (a.retestable != b.retestable)
                return a.retestable > b.retestable;
              return a.test_id < b.test_id;
            });
  return out;
}

std::string ranking_csv(const std::vector<Candidate>& ranking) {
  std::string out = "rank,test_id,probability,is_new_scenario\n";
  for (size_t i = 0; i < ranking.size(); ++i) {
    const Candidate& c = ranking[i];
    out += csv::write_row({std::to_string(i + 1), c.test_id,
                           format_probability(c.probability),
                           c.is_new_scenario ? "1" : "0"});
    out += "\n";
  }
  return out;
}

std::vector<Candidate> parse_ranking(const std::string& content) {
  csv::Table table = csv::parse(content);
  int c_test = table.column("test_id");
  int c_prob = table.column("probability");
  int c_new = table.column("is_new_scenario");
  if (c_test < 0)
    throw Error(ErrorCode::SchemaError, "ranking needs a test_id column", 1);
  std::vector<Candidate> out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Candidate c;
    c.test_id = text::trim(row[c_test]);
    if (c_prob >= 0 && !text::trim(row[c_prob]).empty()) {
      try {
        c.probability = std::stod(text::trim(row[c_prob]));
      } catch (const std::exception&) {
        throw Error(ErrorCode::SchemaError,
                    "probability must be a number: '" + row[c_prob] + "'",
                    static_cast<int>(r) + 2);
      }
    }
    if (c_new >= 0 && !text::trim(row[c_new]).empty())
      c.is_new_scenario = text::trim(row[c_new]) != "0";
    out.push_back(std::move(c));
  }
  return out;
}

Metrics evaluate_ranking(const std::vector<std::string>& ranked_ids,
                         const std::set<std::string>& failing) {
  const size_t n = ranked_ids.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "empty ranking");
  size_t total_failing = 0;
  for (const auto& id : ranked_ids)
    if (failing.count(id)) ++total_failing;
  if (total_failing == 0)
    throw Error(ErrorCode::NoFailures, "no ranked test case failed");

  std::vector<size_t> covered(n + 1, 0);
  for (size_t i = 0; i < n; ++i)
    covered[i + 1] = covered[i] + (failing.count(ranked_ids[i]) ? 1 : 0);

  auto area = [&](auto covered_at) {
    double auc = 0.0;
    double prev = 0.0;
    for (size_t i = 1; i <= n; ++i) {
      double y = 100.0 * covered_at(i) / total_failing;
      auc += (prev + y) / 2.0;
      prev = y;
    }
    return auc;
  };
  double auc = area([&](size_t i) { return static_cast<double>(covered[i]); });
  double ideal = area([&](size_t i) {
    return static_cast<double>(std::min(i, total_failing));
  });

  Metrics m;
  m.auc_ratio = auc / ideal;

  size_t first_all = n;
  for (size_t i = 1; i <= n; ++i) {
    if (covered[i] == total_failing) {
      first_all = i;
      break;
    }
  }
  m.pct_to_cover_all_failing = 100.0 * first_all / n;

  double threshold = 0.8 * static_cast<double>(total_failing);
  size_t first_80 = n;
  for (size_t i = 1; i <= n; ++i) {
    if (static_cast<double>(covered[i]) >= threshold - 1e-9) {
      first_80 = i;
      break;
    }
  }
  m.pct_to_cover_80pct_failing = 100.0 * first_80 / n;

  size_t half = (n + 1) / 2;
  m.pct_failing_in_first_half = 100.0 * covered[half] / total_failing;
  return m;
}

std::string metrics_json(const Metrics& metrics) {
  json root;
  root["auc_ratio"] = metrics.auc_ratio;
  root["pct_to_cover_all_failing"] = metrics.pct_to_cover_all_failing;
  root["pct_to_cover_80pct_failing"] = metrics.pct_to_cover_80pct_failing;
  root["pct_failing_in_first_half"] = metrics.pct_failing_in_first_half;
  return root.dump(2) + "\n";
}

}  // namespace plucase::prioritize
