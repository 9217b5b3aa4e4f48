#include "plucase/classify.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>

#include "plucase/text.hpp"

namespace plucase::classify {
namespace {

using rucm::Flow;
using rucm::FlowKind;
using rucm::StepKind;
using rucm::UseCase;
using rucm::UseCaseDocument;
using scenario::CoveredFlow;
using scenario::Graph;
using scenario::Node;
using scenario::NodeKind;
using scenario::Scenario;

constexpr size_t kPathCap = 10000;

enum class Category { Interaction, ConditionStep, Internal, Control };

struct Item {
  std::string origin;
  Category category = Category::Internal;
  std::string signature;
  std::string text;
};

Item step_item(const rucm::Step& s) {
  Item it;
  it.origin = s.origin;
  it.text = s.text;
  switch (s.kind) {
    case StepKind::Input:
    case StepKind::Output:
      it.category = Category::Interaction;
      it.signature =
          std::string(to_string(s.kind)) + "|" + s.entity + "|" + s.actor;
      break;
    case StepKind::Condition:
      it.category = Category::ConditionStep;
      it.signature = s.condition;
      break;
    case StepKind::IncludeUseCase:
      it.category = Category::Control;
      it.signature = "include|" + s.target;
      break;
    case StepKind::Abort:
      it.category = Category::Control;
      it.signature = "abort";
      break;
    default:
      it.category = Category::Internal;
      it.signature = s.text;
      break;
  }
  return it;
}

// Steps of one flow, with the guard of every bounded/global flow inserted
// after its anchor step (several guards at one anchor ordered by flow id).
std::vector<Item> flow_sequence(const UseCase& uc, const Flow& flow) {
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
  for (auto& [step, flows] : guards_after)
    std::sort(flows.begin(), flows.end(),
              [](const Flow* a, const Flow* b) { return a->id < b->id; });

  std::vector<Item> items;
  for (const auto& s : flow.steps) {
    items.push_back(step_item(s));
    auto g = guards_after.find(s.number);
    if (g == guards_after.end()) continue;
    for (const Flow* f : g->second) {
      Item it;
      it.origin = "guard|" + uc.name + "|" + f->id;
      it.category = Category::ConditionStep;
      it.signature = f->guard;
      it.text = f->guard;
      items.push_back(std::move(it));
    }
  }
  return items;
}

struct Delta {
  enum class What { Added, Removed, Updated, Moved };
  What what = What::Added;
  const Item* item = nullptr;  // the new item for Added/Updated, else old
};

std::vector<Delta> diff_sequences(const std::vector<Item>& old_items,
                                  const std::vector<Item>& new_items) {
  std::map<std::string, const Item*> old_by_origin, new_by_origin;
  for (const auto& it : old_items) old_by_origin[it.origin] = &it;
  for (const auto& it : new_items) new_by_origin[it.origin] = &it;

  std::vector<Delta> deltas;
  for (const auto& it : old_items)
    if (!new_by_origin.count(it.origin))
      deltas.push_back({Delta::What::Removed, &it});
  for (const auto& it : new_items) {
    auto old = old_by_origin.find(it.origin);
    if (old == old_by_origin.end())
      deltas.push_back({Delta::What::Added, &it});
    else if (old->second->signature != it.signature)
      deltas.push_back({Delta::What::Updated, &it});
  }

  std::vector<std::string> old_order, new_order;
  for (const auto& it : old_items)
    if (new_by_origin.count(it.origin)) old_order.push_back(it.origin);
  for (const auto& it : new_items)
    if (old_by_origin.count(it.origin)) new_order.push_back(it.origin);
  for (const auto& origin : rank_moved(old_order, new_order))
    deltas.push_back({Delta::What::Moved, new_by_origin.at(origin)});
  return deltas;
}

const char* delta_word(Delta::What what) {
  switch (what) {
    case Delta::What::Added: return "added";
    case Delta::What::Removed: return "removed";
    case Delta::What::Updated: return "updated";
    case Delta::What::Moved: return "moved";
  }
  return "?";
}

Verdict worse(Verdict a, Verdict b) { return a < b ? b : a; }

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Reusable: return "reusable";
    case Verdict::Retestable: return "retestable";
    case Verdict::Obsolete: return "obsolete";
  }
  return "?";
}

const char* to_string(EditOp::Kind kind) {
  switch (kind) {
    case EditOp::Kind::Add: return "add";
    case EditOp::Kind::Remove: return "remove";
    case EditOp::Kind::Reorder: return "reorder";
  }
  return "?";
}

bool refers_to_entity(const std::string& condition,
                      const std::vector<std::string>& entities) {
  std::vector<std::string> tokens = text::normalize_phrase(condition);
  for (const auto& entity : entities) {
    std::vector<std::string> needle = text::normalize_phrase(entity);
    if (!needle.empty() && text::contains_token_seq(tokens, needle))
      return true;
  }
  return false;
}

std::vector<std::string> rank_moved(const std::vector<std::string>& before,
                                    const std::vector<std::string>& after) {
  std::set<std::string> in_before(before.begin(), before.end());
  std::set<std::string> in_after(after.begin(), after.end());
  std::vector<std::string> common_before, common_after;
  for (const auto& id : before)
    if (in_after.count(id)) common_before.push_back(id);
  for (const auto& id : after)
    if (in_before.count(id)) common_after.push_back(id);
  std::vector<std::string> moved;
  for (size_t i = 0; i < common_before.size(); ++i)
    if (common_before[i] != common_after[i]) moved.push_back(common_before[i]);
  return moved;
}

Assessment assess_scenario(const UseCaseDocument& old_doc,
                           const UseCaseDocument& new_doc,
                           const Scenario& s_old) {
  std::vector<std::string> input_entities;
  for (const Node& n : s_old.path)
    if (n.kind == NodeKind::Interaction && n.step_kind == StepKind::Input &&
        !n.entity.empty())
      input_entities.push_back(n.entity);

  Assessment out;
  size_t delta_count = 0;
  auto add_reason = [&](const char* rule, Verdict v, const CoveredFlow& cf,
                        const std::string& what) {
    out.verdict = worse(out.verdict, v);
    out.reasons.push_back({rule, cf.use_case + "/" + cf.flow_id + ": " + what});
    ++delta_count;
  };

  for (const CoveredFlow& cf : s_old.covered_flows) {
    const UseCase* new_uc = new_doc.find(cf.use_case);
    const Flow* new_flow = new_uc ? new_uc->find_flow(cf.flow_id) : nullptr;
    if (!new_uc || !new_flow) {
      add_reason(rules::flow_removed, Verdict::Obsolete, cf,
                 "flow no longer exists in the new product");
      continue;
    }
    const UseCase* old_uc = old_doc.find(cf.use_case);
    const Flow* old_flow = old_uc ? old_uc->find_flow(cf.flow_id) : nullptr;
    if (!old_uc || !old_flow) continue;

    std::vector<Item> old_items = flow_sequence(*old_uc, *old_flow);
    std::vector<Item> new_items = flow_sequence(*new_uc, *new_flow);
    std::map<std::string, const Item*> old_by_origin;
    for (const auto& it : old_items) old_by_origin[it.origin] = &it;

    for (const Delta& d : diff_sequences(old_items, new_items)) {
      const Item& item = *d.item;
      std::string what = std::string(delta_word(d.what)) + " '" + item.text + "'";
      bool moved = d.what == Delta::What::Moved;
      switch (item.category) {
        case Category::Internal:
          add_reason(moved ? rules::internal_reordered : rules::internal_changed,
                     Verdict::Retestable, cf, "internal step " + what);
          break;
        case Category::ConditionStep: {
          if (moved) {
            add_reason(rules::conditions_reordered, Verdict::Obsolete, cf,
                       "condition " + what);
            break;
          }
          bool interface = refers_to_entity(item.signature, input_entities);
          if (d.what == Delta::What::Updated) {
            auto old = old_by_origin.find(item.origin);
            if (old != old_by_origin.end())
              interface = interface ||
                          refers_to_entity(old->second->signature, input_entities);
          }
          add_reason(interface ? rules::condition_interface
                               : rules::condition_internals,
                     interface ? Verdict::Obsolete : Verdict::Retestable, cf,
                     "condition " + what);
          break;
        }
        case Category::Interaction:
          add_reason(moved ? rules::interactions_reordered
                           : rules::interactions_changed,
                     Verdict::Obsolete, cf, "interaction " + what);
          break;
        case Category::Control:
          add_reason(moved ? rules::control_reordered : rules::control_changed,
                     Verdict::Obsolete, cf, "control step " + what);
          break;
      }
    }
  }
  if (delta_count >= 2)
    out.reasons.push_back(
        {rules::multiple_changes,
         std::to_string(delta_count) + " changes impact the scenario"});
  return out;
}

std::vector<StepId> step_ids(const std::vector<Node>& path) {
  std::vector<StepId> out;
  for (const Node& n : path) {
    switch (n.kind) {
      case NodeKind::Interaction:
      case NodeKind::Internal:
      case NodeKind::Condition:
      case NodeKind::Include:
        out.push_back({n.origin, n.text});
        break;
      default:
        break;
    }
  }
  return out;
}

std::vector<EditOp> guidance_edits(const std::vector<Node>& old_path,
                                   const std::vector<Node>& new_path) {
  std::vector<StepId> a = step_ids(old_path);
  std::vector<StepId> b = step_ids(new_path);
  size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j)
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);

  struct Slot {
    StepId id;
    int position;
    bool paired = false;
  };
  std::vector<Slot> removes, adds;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1] &&
        dp[i][j] == dp[i - 1][j - 1] + 1) {
      --i, --j;
    } else if (i > 0 && (j == 0 || dp[i - 1][j] >= dp[i][j - 1])) {
      removes.push_back({a[i - 1], static_cast<int>(i)});
      --i;
    } else {
      adds.push_back({b[j - 1], static_cast<int>(j)});
      --j;
    }
  }
  std::reverse(removes.begin(), removes.end());
  std::reverse(adds.begin(), adds.end());

  std::vector<EditOp> ops;
  std::vector<EditOp> reorders;
  for (auto& rem : removes) {
    for (auto& add : adds) {
      if (add.paired || add.id != rem.id) continue;
      rem.paired = add.paired = true;
      reorders.push_back({EditOp::Kind::Reorder, rem.id.first, rem.id.second,
                          rem.position, add.position});
      break;
    }
  }
  for (const auto& rem : removes)
    if (!rem.paired)
      ops.push_back(
          {EditOp::Kind::Remove, rem.id.first, rem.id.second, rem.position, 0});
  for (const auto& add : adds)
    if (!add.paired)
      ops.push_back(
          {EditOp::Kind::Add, add.id.first, add.id.second, 0, add.position});
  for (auto& op : reorders) ops.push_back(std::move(op));
  return ops;
}

std::vector<StepId> apply_guidance(std::vector<StepId> steps,
                                   const std::vector<EditOp>& edits) {
  std::vector<int> drop;
  std::vector<std::pair<int, StepId>> insert;
  for (const auto& op : edits) {
    switch (op.kind) {
      case EditOp::Kind::Remove:
        drop.push_back(op.from_position);
        break;
      case EditOp::Kind::Add:
        insert.push_back({op.position, {op.origin, op.text}});
        break;
      case EditOp::Kind::Reorder:
        drop.push_back(op.from_position);
        insert.push_back({op.position, {op.origin, op.text}});
        break;
    }
  }
  std::sort(drop.begin(), drop.end(), std::greater<int>());
  for (int pos : drop)
    if (pos >= 1 && pos <= static_cast<int>(steps.size()))
      steps.erase(steps.begin() + pos - 1);
  std::sort(insert.begin(), insert.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [pos, id] : insert) {
    int at = std::clamp(pos - 1, 0, static_cast<int>(steps.size()));
    steps.insert(steps.begin() + at, id);
  }
  return steps;
}

namespace {

// Replays an old scenario on the graphs of the new product. Conditions the
// old scenario decided follow the recorded branches; conditions it never
// met fork, true branch first, each body taken at most once per include
// instance. A leaf is the continuation when it never entered the body of
// an undecided condition.
class Walker {
 public:
  explicit Walker(const UseCaseDocument& doc) : doc_(doc) {}

  struct Leaf {
    Scenario scenario;
    bool diverged = false;
    bool aborts = false;
  };

  std::vector<Leaf> walk(const Scenario& s_old) {
    leaves_.clear();
    recorded_.clear();
    for (const auto& b : s_old.branches) recorded_[b.origin].push_back(b.taken);
    if (!doc_.find(s_old.root)) return {};
    const Graph* g = graph_for(s_old.root);
    State st;
    dfs(st, g, g->start, 0);
    return std::move(leaves_);
  }

 private:
  struct Frame {
    const Graph* g;
    int resume;
    int instance;
  };

  struct State {
    std::vector<Node> path;
    std::vector<CoveredFlow> covered;
    std::set<std::pair<std::string, std::string>> covered_keys;
    std::vector<scenario::BranchRecord> branches;
    std::map<std::string, size_t> next_branch;
    std::map<std::pair<int, int>, int> visits;
    std::vector<Frame> stack;
    int instances = 0;
    bool diverged = false;
  };

  const Graph* graph_for(const std::string& name) {
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

  void record_coverage(State& st, const Node& n) {
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
    Leaf leaf;
    leaf.scenario.path = st.path;
    leaf.scenario.covered_flows = st.covered;
    leaf.scenario.branches = st.branches;
    leaf.scenario.aborts = aborts;
    leaf.aborts = aborts;
    leaf.diverged = st.diverged;
    leaves_.push_back(std::move(leaf));
  }

  void dfs(State& st, const Graph* g, int id, int instance) {
    if (st.path.size() > kPathCap) {
      throw Error(ErrorCode::MalformedFlow,
                  "replayed paths of '" + g->use_case + "' do not terminate");
    }
    const Node& n = g->nodes[id];
    st.path.push_back(n);
    record_coverage(st, n);

    switch (n.kind) {
      case NodeKind::Exit:
        if (st.stack.empty()) {
          emit(st, false);
        } else {
          Frame f = st.stack.back();
          st.stack.pop_back();
          dfs(st, f.g, f.resume, f.instance);
        }
        break;
      case NodeKind::Abort:
        emit(st, true);
        break;
      case NodeKind::Include: {
        if (g->use_case == n.target ||
            std::any_of(st.stack.begin(), st.stack.end(), [&](const Frame& f) {
              return f.g->use_case == n.target;
            })) {
          throw Error(ErrorCode::IncludeCycle,
                      "use case inclusion cycles through '" + n.target + "'");
        }
        const Graph* tg = graph_for(n.target);
        st.stack.push_back({g, n.next, instance});
        dfs(st, tg, tg->start, ++st.instances);
        break;
      }
      case NodeKind::Condition: {
        bool exit_branch = !n.label.empty();
        auto rec = recorded_.find(n.origin);
        if (rec != recorded_.end()) {
          size_t& idx = st.next_branch[n.origin];
          bool taken = idx < rec->second.size() ? rec->second[idx++] : exit_branch;
          st.branches.push_back({n.origin, taken});
          dfs(st, g, taken ? n.true_next : n.false_next, instance);
          break;
        }
        int& seen = st.visits[{instance, id}];
        if (seen >= 1) {
          st.branches.push_back({n.origin, exit_branch});
          dfs(st, g, exit_branch ? n.true_next : n.false_next, instance);
          break;
        }
        seen = 1;
        bool body_branch = !exit_branch;
        State copy = st;
        st.branches.push_back({n.origin, true});
        if (body_branch == true) st.diverged = true;
        dfs(st, g, n.true_next, instance);
        st = std::move(copy);
        st.branches.push_back({n.origin, false});
        if (body_branch == false) st.diverged = true;
        dfs(st, g, n.false_next, instance);
        break;
      }
      default:
        dfs(st, g, n.next, instance);
        break;
    }
  }

  const UseCaseDocument& doc_;
  std::map<std::string, Graph> graphs_;
  std::map<std::string, std::vector<bool>> recorded_;
  std::vector<Leaf> leaves_;
};

std::string origin_key(const std::vector<Node>& path) {
  std::string key;
  for (const Node& n : path) {
    key += n.origin;
    key += '\x1f';
  }
  return key;
}

std::set<std::pair<std::string, std::string>> signature(const Scenario& s) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& cf : s.covered_flows) out.insert({cf.use_case, cf.flow_id});
  return out;
}

}  // namespace

Analysis analyze(const UseCaseDocument& old_doc, const UseCaseDocument& new_doc,
                 const std::vector<Scenario>& old_scenarios,
                 const trace::MatchResult& matches) {
  Analysis out;
  out.findings = matches.findings;

  struct Tested {
    const Scenario* s;
    const std::vector<std::string>* tests;
    Verdict verdict;
  };
  std::vector<Tested> tested;
  for (const auto& s : old_scenarios) {
    auto it = matches.scenario_to_tests.find(s.id);
    if (it == matches.scenario_to_tests.end()) continue;
    Assessment a = assess_scenario(old_doc, new_doc, s);
    for (const auto& test : it->second)
      out.tests.push_back({test, s.id, a.verdict, a.reasons});
    tested.push_back({&s, &it->second, a.verdict});
  }
  std::sort(out.tests.begin(), out.tests.end(),
            [](const TestVerdict& a, const TestVerdict& b) {
              return a.test_id < b.test_id;
            });

  struct Candidate {
    Scenario shape;
    std::set<std::pair<std::string, std::string>> covered;
    std::vector<const Tested*> sources;
  };
  std::vector<Candidate> candidates;
  std::map<std::string, size_t> by_key;

  Walker walker(new_doc);
  for (const Tested& t : tested) {
    if (t.verdict == Verdict::Reusable) {
      for (const auto& test : *t.tests) out.successors[test] = *t.s;
      continue;
    }
    std::vector<Walker::Leaf> leaves = walker.walk(*t.s);
    for (Walker::Leaf& leaf : leaves) {
      leaf.scenario.root = t.s->root;
      scenario::compute_stats(leaf.scenario, new_doc);
      if (!leaf.diverged) {
        leaf.scenario.id = t.s->id;
        if (t.verdict == Verdict::Retestable)
          for (const auto& test : *t.tests)
            out.successors[test] = leaf.scenario;
      }
      std::string key = origin_key(leaf.scenario.path);
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        it = by_key.emplace(key, candidates.size()).first;
        candidates.push_back({leaf.scenario, signature(leaf.scenario), {}});
      }
      auto& sources = candidates[it->second].sources;
      if (std::find(sources.begin(), sources.end(), &t) == sources.end())
        sources.push_back(&t);
    }
  }

  int ordinal = 0;
  for (const Candidate& c : candidates) {
    bool already_tested = std::any_of(
        tested.begin(), tested.end(), [&](const Tested& t) {
          return t.verdict != Verdict::Obsolete && signature(*t.s) == c.covered;
        });
    if (already_tested) continue;

    NewScenario ns;
    ns.id = "NEW#" + std::to_string(++ordinal);
    ns.shape = c.shape;
    ns.shape.id = ns.id;

    std::vector<Guidance> all;
    for (const Tested* src : c.sources) {
      Guidance g;
      g.source_scenario = src->s->id;
      g.source_tests = *src->tests;
      g.edits = guidance_edits(src->s->path, ns.shape.path);
      all.push_back(std::move(g));
    }
    size_t best_count = SIZE_MAX;
    for (const auto& g : all) best_count = std::min(best_count, g.edits.size());
    auto removals = [](const Guidance& g) {
      return std::count_if(g.edits.begin(), g.edits.end(), [](const EditOp& op) {
        return op.kind == EditOp::Kind::Remove;
      });
    };
    long best_removals = -1;
    for (const auto& g : all)
      if (g.edits.size() == best_count)
        best_removals = std::max(best_removals, removals(g));
    for (auto& g : all)
      if (g.edits.size() == best_count && removals(g) == best_removals)
        ns.guidance.push_back(std::move(g));
    out.new_scenarios.push_back(std::move(ns));
  }
  return out;
}

}  // namespace plucase::classify
