#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "plucase/error.hpp"

namespace plucase::testing {
namespace {

using rucm::Flow;
using rucm::FlowKind;
using rucm::Step;
using rucm::StepKind;
using rucm::UseCase;
using rucm::UseCaseDocument;
using scenario::CoveredFlow;
using scenario::Graph;
using scenario::Node;
using scenario::NodeKind;
using scenario::Scenario;

class BruteForce {
 public:
  explicit BruteForce(const UseCaseDocument& doc) : doc_(doc) {}

  std::vector<Scenario> run(const std::string& root) {
    results_.clear();
    const Graph* g = graph(root);
    State st;
    go(std::move(st), g, g->start, 0);
    for (size_t i = 0; i < results_.size(); ++i) {
      results_[i].id = root + "#" + std::to_string(i + 1);
      results_[i].root = root;
      scenario::compute_stats(results_[i], doc_);
    }
    return std::move(results_);
  }

 private:
  struct Frame {
    const Graph* graph;
    int resume;
    int instance;
  };

  struct State {
    std::vector<Node> path;
    std::vector<CoveredFlow> covered;
    std::set<std::pair<std::string, std::string>> covered_keys;
    std::vector<scenario::BranchRecord> branches;
    std::map<std::pair<int, int>, int> visits;  // (include instance, node)
    std::vector<Frame> frames;
    int instances = 0;
  };

  const Graph* graph(const std::string& name) {
    auto it = graphs_.find(name);
    if (it == graphs_.end()) {
      const UseCase* uc = doc_.find(name);
      if (!uc) {
        throw Error(ErrorCode::UnknownReference,
                    "included use case '" + name + "' is not specified");
      }
      it = graphs_.emplace(name, scenario::build_graph(doc_, *uc)).first;
    }
    return &it->second;
  }

  void cover(State& st, const Node& n) {
    if (n.label.empty()) return;
    if (!st.covered_keys.insert({n.use_case, n.flow_id}).second) return;
    CoveredFlow cf;
    cf.use_case = n.use_case;
    cf.flow_id = n.flow_id;
    const UseCase* uc = doc_.find(n.use_case);
    if (const Flow* f = uc ? uc->find_flow(n.flow_id) : nullptr)
      cf.provenance = f->provenance;
    st.covered.push_back(std::move(cf));
  }

  void emit(const State& st, bool aborts) {
    Scenario s;
    s.path = st.path;
    s.covered_flows = st.covered;
    s.branches = st.branches;
    s.aborts = aborts;
    results_.push_back(std::move(s));
  }

  void go(State st, const Graph* g, int id, int instance) {
    const Node& n = g->nodes[id];
    st.path.push_back(n);
    cover(st, n);
    switch (n.kind) {
      case NodeKind::Exit: {
        if (st.frames.empty()) {
          emit(st, false);
          return;
        }
        Frame f = st.frames.back();
        st.frames.pop_back();
        go(std::move(st), f.graph, f.resume, f.instance);
        return;
      }
      case NodeKind::Abort:
        emit(st, true);
        return;
      case NodeKind::Include: {
        const Graph* sub = graph(n.target);
        st.frames.push_back({g, n.next, instance});
        int inner = ++st.instances;
        go(std::move(st), sub, sub->start, inner);
        return;
      }
      case NodeKind::Condition: {
        bool exit_branch = !n.label.empty();
        int seen = st.visits[{instance, id}]++;
        if (seen >= 1) {
          st.branches.push_back({n.origin, exit_branch});
          go(std::move(st), g, exit_branch ? n.true_next : n.false_next,
             instance);
          return;
        }
        State other = st;
        st.branches.push_back({n.origin, true});
        go(std::move(st), g, n.true_next, instance);
        other.branches.push_back({n.origin, false});
        go(std::move(other), g, n.false_next, instance);
        return;
      }
      default:
        go(std::move(st), g, n.next, instance);
        return;
    }
  }

  const UseCaseDocument& doc_;
  std::map<std::string, Graph> graphs_;
  std::vector<Scenario> results_;
};

enum class Cat { Interaction, Condition, Internal, Control };

Cat category_of(StepKind kind) {
  switch (kind) {
    case StepKind::Input:
    case StepKind::Output:
      return Cat::Interaction;
    case StepKind::Condition:
      return Cat::Condition;
    case StepKind::IncludeUseCase:
      return Cat::Control;
    case StepKind::Abort:
      return Cat::Control;
    default:
      return Cat::Internal;
  }
}

std::string signature_of(const Step& s) {
  switch (s.kind) {
    case StepKind::Input:
    case StepKind::Output:
      return std::string(to_string(s.kind)) + "|" + s.entity + "|" + s.actor;
    case StepKind::Condition:
      return s.condition;
    case StepKind::IncludeUseCase:
      return "include|" + s.target;
    case StepKind::Abort:
      return "abort";
    default:
      return s.text;
  }
}

struct OItem {
  std::string origin;
  Cat cat = Cat::Internal;
  std::string sig;
};

std::vector<OItem> items_of(const UseCase& uc, const Flow& flow) {
  std::map<std::string, std::vector<const Flow*>> guards_after;
  for (const auto& f : uc.alternative_flows) {
    if (f.kind == FlowKind::BoundedAlt && !f.rfs.empty() &&
        f.rfs.front().flow_id == flow.id) {
      guards_after[f.rfs.front().number].push_back(&f);
    } else if (f.kind == FlowKind::GlobalAlt &&
               flow.kind == FlowKind::Basic && !flow.steps.empty()) {
      guards_after[flow.steps.front().number].push_back(&f);
    }
  }
  for (auto& [num, flows] : guards_after)
    std::sort(flows.begin(), flows.end(),
              [](const Flow* a, const Flow* b) { return a->id < b->id; });

  std::vector<OItem> items;
  for (const auto& s : flow.steps) {
    items.push_back({s.origin, category_of(s.kind), signature_of(s)});
    auto g = guards_after.find(s.number);
    if (g == guards_after.end()) continue;
    for (const Flow* f : g->second)
      items.push_back({"guard|" + uc.name + "|" + f->id, Cat::Condition,
                       f->guard});
  }
  return items;
}

enum class Change { Added, Removed, Updated, Moved };

struct TableRow {
  Cat cat;
  bool moved;
  int entity_ref;  // 1 = refers to an input entity, 0 = does not, -1 = any
  classify::Verdict verdict;
  const char* rule;
};

const TableRow kVerdictTable[] = {
    {Cat::Internal, false, -1, classify::Verdict::Retestable,
     classify::rules::internal_changed},
    {Cat::Internal, true, -1, classify::Verdict::Retestable,
     classify::rules::internal_reordered},
    {Cat::Condition, false, 1, classify::Verdict::Obsolete,
     classify::rules::condition_interface},
    {Cat::Condition, false, 0, classify::Verdict::Retestable,
     classify::rules::condition_internals},
    {Cat::Condition, true, -1, classify::Verdict::Obsolete,
     classify::rules::conditions_reordered},
    {Cat::Interaction, false, -1, classify::Verdict::Obsolete,
     classify::rules::interactions_changed},
    {Cat::Interaction, true, -1, classify::Verdict::Obsolete,
     classify::rules::interactions_reordered},
    {Cat::Control, false, -1, classify::Verdict::Obsolete,
     classify::rules::control_changed},
    {Cat::Control, true, -1, classify::Verdict::Obsolete,
     classify::rules::control_reordered},
};

}  // namespace

std::vector<Scenario> brute_force_scenarios(const UseCaseDocument& doc,
                                            const std::string& root) {
  return BruteForce(doc).run(root);
}

std::vector<Scenario> brute_force_document(const UseCaseDocument& doc) {
  std::vector<Scenario> out;
  for (const auto& root : scenario::root_use_cases(doc)) {
    auto part = BruteForce(doc).run(root);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

bool same_scenarios(const std::vector<Scenario>& a,
                    const std::vector<Scenario>& b, std::string* why) {
  auto fail = [&](const std::string& message) {
    if (why) *why = message;
    return false;
  };
  if (a.size() != b.size())
    return fail("count " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    const Scenario& x = a[i];
    const Scenario& y = b[i];
    std::string at = "scenario " + std::to_string(i) + ": ";
    if (x.id != y.id) return fail(at + "id " + x.id + " vs " + y.id);
    if (x.root != y.root) return fail(at + "root");
    if (x.aborts != y.aborts) return fail(at + "aborts");
    if (x.size_s != y.size_s || x.size_v != y.size_v)
      return fail(at + "stats");
    if (x.path.size() != y.path.size())
      return fail(at + "path length " + std::to_string(x.path.size()) +
                  " vs " + std::to_string(y.path.size()));
    for (size_t j = 0; j < x.path.size(); ++j) {
      const Node& p = x.path[j];
      const Node& q = y.path[j];
      if (p.kind != q.kind || p.use_case != q.use_case ||
          p.flow_id != q.flow_id || p.label != q.label || p.origin != q.origin)
        return fail(at + "path node " + std::to_string(j) + " (" + p.origin +
                    " vs " + q.origin + ")");
    }
    if (x.covered_flows.size() != y.covered_flows.size())
      return fail(at + "covered flow count");
    for (size_t j = 0; j < x.covered_flows.size(); ++j) {
      const CoveredFlow& p = x.covered_flows[j];
      const CoveredFlow& q = y.covered_flows[j];
      if (!(p == q) || p.provenance != q.provenance)
        return fail(at + "covered flow " + std::to_string(j));
    }
    if (x.branches.size() != y.branches.size())
      return fail(at + "branch count");
    for (size_t j = 0; j < x.branches.size(); ++j)
      if (x.branches[j].origin != y.branches[j].origin ||
          x.branches[j].taken != y.branches[j].taken)
        return fail(at + "branch " + std::to_string(j));
  }
  return true;
}

classify::Assessment rule_table_assess(const UseCaseDocument& old_doc,
                                       const UseCaseDocument& new_doc,
                                       const Scenario& s_old) {
  std::vector<std::string> entities;
  for (const Node& n : s_old.path)
    if (n.kind == NodeKind::Interaction && n.step_kind == StepKind::Input &&
        !n.entity.empty())
      entities.push_back(n.entity);

  classify::Assessment out;
  size_t count = 0;
  auto worse = [](classify::Verdict a, classify::Verdict b) {
    return a < b ? b : a;
  };
  auto add = [&](classify::Verdict v, const char* rule) {
    out.verdict = worse(out.verdict, v);
    out.reasons.push_back({rule, ""});
    ++count;
  };

  for (const CoveredFlow& cf : s_old.covered_flows) {
    const UseCase* new_uc = new_doc.find(cf.use_case);
    const Flow* new_flow = new_uc ? new_uc->find_flow(cf.flow_id) : nullptr;
    if (!new_uc || !new_flow) {
      add(classify::Verdict::Obsolete, classify::rules::flow_removed);
      continue;
    }
    const UseCase* old_uc = old_doc.find(cf.use_case);
    const Flow* old_flow = old_uc ? old_uc->find_flow(cf.flow_id) : nullptr;
    if (!old_uc || !old_flow) continue;

    std::vector<OItem> old_items = items_of(*old_uc, *old_flow);
    std::vector<OItem> new_items = items_of(*new_uc, *new_flow);
    std::map<std::string, const OItem*> olds, news;
    for (const auto& it : old_items) olds[it.origin] = &it;
    for (const auto& it : new_items) news[it.origin] = &it;

    struct ODelta {
      Change change;
      const OItem* item;
      const OItem* old_item;  // Updated only
    };
    std::vector<ODelta> deltas;
    for (const auto& it : old_items)
      if (!news.count(it.origin))
        deltas.push_back({Change::Removed, &it, nullptr});
    for (const auto& it : new_items) {
      auto old = olds.find(it.origin);
      if (old == olds.end())
        deltas.push_back({Change::Added, &it, nullptr});
      else if (old->second->sig != it.sig)
        deltas.push_back({Change::Updated, &it, old->second});
    }
    std::vector<const OItem*> shared_old, shared_new;
    for (const auto& it : old_items)
      if (news.count(it.origin)) shared_old.push_back(&it);
    for (const auto& it : new_items)
      if (olds.count(it.origin)) shared_new.push_back(&it);
    for (size_t i = 0; i < shared_old.size(); ++i)
      if (shared_old[i]->origin != shared_new[i]->origin)
        deltas.push_back({Change::Moved, news.at(shared_old[i]->origin),
                          nullptr});

    for (const ODelta& d : deltas) {
      bool moved = d.change == Change::Moved;
      int ref = -1;
      if (d.item->cat == Cat::Condition && !moved) {
        bool hit = classify::refers_to_entity(d.item->sig, entities);
        if (d.change == Change::Updated && d.old_item)
          hit = hit || classify::refers_to_entity(d.old_item->sig, entities);
        ref = hit ? 1 : 0;
      }
      for (const TableRow& row : kVerdictTable) {
        if (row.cat != d.item->cat || row.moved != moved) continue;
        if (row.entity_ref != -1 && row.entity_ref != ref) continue;
        add(row.verdict, row.rule);
        break;
      }
    }
  }
  if (count >= 2)
    out.reasons.push_back({classify::rules::multiple_changes, ""});
  return out;
}

double normal_cdf_oracle(double z) {
  long double x = static_cast<long double>(z);
  return static_cast<double>(0.5L * erfcl(-x / sqrtl(2.0L)));
}

namespace {

double factor_of(const prioritize::TrainingRow& r, const std::string& f) {
  if (f == "intercept") return 1.0;
  if (f == "V") return r.variability;
  if (f == "S") return r.size;
  if (f == "FP") return r.failed_products;
  if (f == "FV") return r.failed_versions;
  if (f == "R") return r.retestable;
  return 0.0;
}

}  // namespace

std::vector<double> logistic_score(
    const std::vector<prioritize::TrainingRow>& rows,
    const std::vector<std::string>& factors, const std::vector<double>& beta) {
  size_t k = factors.size();
  std::vector<double> score(k, 0.0);
  for (const auto& row : rows) {
    double eta = 0.0;
    for (size_t j = 0; j < k; ++j) eta += beta[j] * factor_of(row, factors[j]);
    double mu = 1.0 / (1.0 + std::exp(-eta));
    for (size_t j = 0; j < k; ++j)
      score[j] += factor_of(row, factors[j]) * (row.fails - mu);
  }
  return score;
}

std::vector<double> gd_logistic_fit(
    const std::vector<prioritize::TrainingRow>& rows,
    const std::vector<std::string>& factors, int max_iters, double tol) {
  size_t n = rows.size();
  size_t k = factors.size();
  std::vector<std::vector<double>> x(n, std::vector<double>(k));
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < k; ++j) x[i][j] = factor_of(rows[i], factors[j]);
    y[i] = rows[i].fails ? 1.0 : 0.0;
  }

  // Standardized coordinates keep plain gradient descent well conditioned.
  std::vector<double> mean(k, 0.0), sd(k, 1.0);
  for (size_t j = 1; j < k; ++j) {
    double m = 0.0;
    for (size_t i = 0; i < n; ++i) m += x[i][j];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (size_t i = 0; i < n; ++i) v += (x[i][j] - m) * (x[i][j] - m);
    v /= static_cast<double>(n);
    mean[j] = m;
    sd[j] = v > 0.0 ? std::sqrt(v) : 1.0;
    for (size_t i = 0; i < n; ++i) x[i][j] = (x[i][j] - mean[j]) / sd[j];
  }

  auto nll = [&](const std::vector<double>& b) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (size_t j = 0; j < k; ++j) eta += b[j] * x[i][j];
      double log1pe =
          eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      total += log1pe - y[i] * eta;
    }
    return total / static_cast<double>(n);
  };

  std::vector<double> b(k, 0.0), g(k, 0.0), trial(k, 0.0);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::fill(g.begin(), g.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (size_t j = 0; j < k; ++j) eta += b[j] * x[i][j];
      double mu = 1.0 / (1.0 + std::exp(-eta));
      for (size_t j = 0; j < k; ++j) g[j] += x[i][j] * (mu - y[i]);
    }
    double gmax = 0.0, gg = 0.0;
    for (size_t j = 0; j < k; ++j) {
      g[j] /= static_cast<double>(n);
      gmax = std::max(gmax, std::abs(g[j]));
      gg += g[j] * g[j];
    }
    if (gmax < tol) break;
    double f0 = nll(b);
    double t = 4.0;
    bool stepped = false;
    while (t > 1e-14) {
      for (size_t j = 0; j < k; ++j) trial[j] = b[j] - t * g[j];
      if (nll(trial) <= f0 - 0.5 * t * gg) {
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    if (!stepped) break;
    b = trial;
  }

  std::vector<double> beta(k, 0.0);
  double shift = 0.0;
  for (size_t j = 1; j < k; ++j) {
    beta[j] = b[j] / sd[j];
    shift += b[j] * mean[j] / sd[j];
  }
  beta[0] = b[0] - shift;
  return beta;
}

}  // namespace plucase::testing
