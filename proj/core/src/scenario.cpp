#include "plucase/scenario.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace plucase::scenario {
namespace {

using rucm::Flow;
using rucm::FlowKind;
using rucm::Step;
using rucm::StepKind;
using rucm::UseCase;
using rucm::UseCaseDocument;

constexpr size_t kPathCap = 10000;

NodeKind node_kind_of(StepKind kind) {
  switch (kind) {
    case StepKind::Input:
    case StepKind::Output:
      return NodeKind::Interaction;
    case StepKind::Condition:
      return NodeKind::Condition;
    case StepKind::IncludeUseCase:
      return NodeKind::Include;
    case StepKind::Abort:
      return NodeKind::Abort;
    default:
      return NodeKind::Internal;
  }
}

struct FlowPos {
  const Flow* flow = nullptr;
  size_t index = 0;
};

class Builder {
 public:
  Builder(const UseCaseDocument& doc, const UseCase& uc)
      : doc_(doc), uc_(uc) {}

  Graph build() {
    (void)doc_;
    g_.use_case = uc_.name;

    Node start;
    start.kind = NodeKind::Start;
    start.use_case = uc_.name;
    start.origin = "start|" + uc_.name;
    g_.start = add_node(std::move(start));

    flows_.push_back(&uc_.basic_flow);
    for (const auto& f : uc_.alternative_flows) flows_.push_back(&f);
    create_step_nodes();

    Node exit;
    exit.kind = NodeKind::Exit;
    exit.use_case = uc_.name;
    exit.origin = "exit|" + uc_.name;
    g_.exit = add_node(std::move(exit));

    index_anchors();
    wire();
    return std::move(g_);
  }

 private:
  using Key = std::pair<std::string, std::string>;  // flow id, step label

  int add_node(Node n) {
    g_.nodes.push_back(std::move(n));
    return static_cast<int>(g_.nodes.size()) - 1;
  }

  void create_step_nodes() {
    for (const Flow* f : flows_) {
      for (size_t i = 0; i < f->steps.size(); ++i) {
        const Step& s = f->steps[i];
        if (s.kind == StepKind::IncludeVariationPoint) {
          throw Error(ErrorCode::MalformedFlow,
                      "variation point include in '" + uc_.name +
                          "' cannot be laid out; configure the document "
                          "first");
        }
        Node n;
        n.kind = node_kind_of(s.kind);
        n.use_case = uc_.name;
        n.flow_id = f->id;
        n.label = s.number;
        n.text = s.text;
        n.condition = s.condition;
        n.entity = s.entity;
        n.actor = s.actor;
        n.target = s.target;
        n.step_kind = s.kind;
        n.origin = s.origin;
        n.provenance = s.provenance;
        int id = add_node(std::move(n));
        node_of_[{f->id, s.number}] = id;
        pos_of_[{f->id, s.number}] = FlowPos{f, i};
      }
    }
  }

  void index_anchors() {
    std::map<Key, std::vector<const Flow*>> guarded;
    for (const Flow* f : flows_) {
      if (f->kind == FlowKind::SpecificAlt) {
        Key anchor{f->rfs.front().flow_id, f->rfs.front().number};
        int cond = node_at(anchor, f->id);
        if (g_.nodes[cond].kind != NodeKind::Condition) {
          throw Error(ErrorCode::MalformedFlow,
                      "flow '" + f->id + "' in '" + uc_.name +
                          "' branches from step " + anchor.first + "." +
                          anchor.second + " which is not a validation");
        }
        if (!specific_body_.emplace(cond, body_start(f)).second) {
          throw Error(ErrorCode::MalformedFlow,
                      "two specific alternative flows branch from step " +
                          anchor.first + "." + anchor.second + " in '" +
                          uc_.name + "'");
        }
        specific_anchor_[f->id] = cond;
      } else if (f->kind == FlowKind::BoundedAlt) {
        Key anchor{f->rfs.front().flow_id, f->rfs.front().number};
        node_at(anchor, f->id);
        guarded[anchor].push_back(f);
        anchor_of_[f->id] = anchor;
      } else if (f->kind == FlowKind::GlobalAlt) {
        Key anchor{uc_.basic_flow.id, uc_.basic_flow.steps.front().number};
        guarded[anchor].push_back(f);
        anchor_of_[f->id] = anchor;
      }
    }
    for (auto& [anchor, flows] : guarded) {
      std::sort(flows.begin(), flows.end(),
                [](const Flow* a, const Flow* b) { return a->id < b->id; });
      std::vector<int> chain;
      for (const Flow* f : flows) {
        Node guard;
        guard.kind = NodeKind::Condition;
        guard.use_case = uc_.name;
        guard.flow_id = anchor.first;
        guard.text = f->guard;
        guard.condition = f->guard;
        guard.step_kind = StepKind::Condition;
        guard.origin = "guard|" + uc_.name + "|" + f->id;
        guard.provenance = f->provenance;
        int id = add_node(std::move(guard));
        guard_of_flow_[f->id] = id;
        chain.push_back(id);
      }
      guards_at_[anchor] = std::move(chain);
    }
  }

  int node_at(const Key& key, const std::string& from_flow) {
    auto it = node_of_.find(key);
    if (it == node_of_.end()) {
      throw Error(ErrorCode::MalformedFlow,
                  "flow '" + from_flow + "' in '" + uc_.name +
                      "' references missing step " + key.first + "." +
                      key.second);
    }
    return it->second;
  }

  int body_start(const Flow* f) {
    return node_of_.at({f->id, f->steps.front().number});
  }

  // Successor of position i in flow f, ignoring guard chains.
  int plain_cont(const Flow* f, size_t i) {
    if (i + 1 < f->steps.size())
      return node_of_.at({f->id, f->steps[i + 1].number});
    return flow_end(f);
  }

  // Where control continues when a flow runs past its last step.
  int flow_end(const Flow* f) {
    auto memo = flow_end_memo_.find(f->id);
    if (memo != flow_end_memo_.end()) return memo->second;
    if (!flow_end_busy_.insert(f->id).second) {
      throw Error(ErrorCode::MalformedFlow,
                  "flows in '" + uc_.name +
                      "' form a cycle of continuations around '" + f->id +
                      "'");
    }
    int result;
    switch (f->kind) {
      case FlowKind::Basic:
        result = g_.exit;
        break;
      case FlowKind::SpecificAlt:
        result = specific_anchor_.at(f->id);  // retry the validation
        break;
      default: {
        const Key& anchor = anchor_of_.at(f->id);
        thread_guards(anchor);
        result = g_.nodes[guard_of_flow_.at(f->id)].false_next;
        break;
      }
    }
    flow_end_busy_.erase(f->id);
    flow_end_memo_[f->id] = result;
    return result;
  }

  void thread_guards(const Key& anchor) {
    if (threaded_.count(anchor)) return;
    if (!threading_.insert(anchor).second) {
      throw Error(ErrorCode::MalformedFlow,
                  "guard chains in '" + uc_.name +
                      "' form a cycle at step " + anchor.first + "." +
                      anchor.second);
    }
    auto it = guards_at_.find(anchor);
    if (it != guards_at_.end()) {
      const FlowPos& pos = pos_of_.at(anchor);
      int tail = plain_cont(pos.flow, pos.index);
      const std::vector<int>& chain = it->second;
      for (size_t j = 0; j < chain.size(); ++j) {
        int next = j + 1 < chain.size() ? chain[j + 1] : tail;
        g_.nodes[chain[j]].false_next = next;
      }
      for (auto& [flow_id, guard_id] : guard_of_flow_) {
        if (anchor_of_.at(flow_id) == anchor)
          g_.nodes[guard_id].true_next =
              body_start(flow_by_id(flow_id));
      }
    }
    threading_.erase(anchor);
    threaded_.insert(anchor);
  }

  const Flow* flow_by_id(const std::string& id) const {
    for (const Flow* f : flows_)
      if (f->id == id) return f;
    return nullptr;
  }

  // Successor of position i in flow f, entering the guard chain of any
  // bounded or global flow anchored right after this step.
  int effective_next(const Flow* f, size_t i) {
    Key key{f->id, f->steps[i].number};
    thread_guards(key);
    auto it = guards_at_.find(key);
    if (it != guards_at_.end()) return it->second.front();
    return plain_cont(f, i);
  }

  void wire() {
    g_.nodes[g_.start].next = effective_entry();
    for (const Flow* f : flows_) {
      for (size_t i = 0; i < f->steps.size(); ++i) {
        int id = node_of_.at({f->id, f->steps[i].number});
        if (g_.nodes[id].kind == NodeKind::Abort) continue;
        int eff = effective_next(f, i);
        if (g_.nodes[id].kind == NodeKind::Condition) {
          auto body = specific_body_.find(id);
          int on_false = body != specific_body_.end()
                             ? body->second
                             : implicit_abort(id);
          g_.nodes[id].true_next = eff;
          g_.nodes[id].false_next = on_false;
        } else {
          g_.nodes[id].next = eff;
        }
      }
    }
  }

  int effective_entry() {
    const Flow* bf = flows_.front();
    return node_of_.at({bf->id, bf->steps.front().number});
  }

  int implicit_abort(int cond_id) {
    Node n;
    n.kind = NodeKind::Abort;
    n.use_case = uc_.name;
    n.flow_id = g_.nodes[cond_id].flow_id;
    n.text = "ABORT.";
    n.step_kind = StepKind::Abort;
    n.origin = "implicit-abort|" + g_.nodes[cond_id].origin;
    n.provenance = g_.nodes[cond_id].provenance;
    return add_node(std::move(n));
  }

  const UseCaseDocument& doc_;
  const UseCase& uc_;
  Graph g_;
  std::vector<const Flow*> flows_;
  std::map<Key, int> node_of_;
  std::map<Key, FlowPos> pos_of_;
  std::map<int, int> specific_body_;          // condition node -> body start
  std::map<std::string, int> specific_anchor_;  // flow id -> condition node
  std::map<std::string, Key> anchor_of_;        // bounded/global flow anchors
  std::map<std::string, int> guard_of_flow_;
  std::map<Key, std::vector<int>> guards_at_;
  std::map<std::string, int> flow_end_memo_;
  std::set<std::string> flow_end_busy_;
  std::set<Key> threaded_;
  std::set<Key> threading_;
};

struct Partial {
  std::vector<Node> path;
  std::vector<CoveredFlow> covered;
  std::vector<BranchRecord> branches;
  bool aborts = false;
};

class Enumerator {
 public:
  explicit Enumerator(const UseCaseDocument& doc) : doc_(doc) {}

  std::vector<Scenario> run(const std::string& root) {
    std::vector<std::string> stack{root};
    std::vector<Partial> partials = enumerate_uc(root, stack);
    std::vector<Scenario> out;
    out.reserve(partials.size());
    for (size_t i = 0; i < partials.size(); ++i) {
      Scenario s;
      s.id = root + "#" + std::to_string(i + 1);
      s.root = root;
      s.path = std::move(partials[i].path);
      s.covered_flows = std::move(partials[i].covered);
      s.branches = std::move(partials[i].branches);
      s.aborts = partials[i].aborts;
      finalize(s);
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  const std::vector<Partial>& enumerate_uc(const std::string& name,
                                           std::vector<std::string>& stack) {
    auto memo = memo_.find(name);
    if (memo != memo_.end()) return memo->second;

    const UseCase* uc = doc_.find(name);
    if (!uc) {
      throw Error(ErrorCode::UnknownReference,
                  "included use case '" + name + "' is not specified");
    }
    Graph g = Builder(doc_, *uc).build();

    Walk walk;
    walk.g = &g;
    walk.stack = &stack;
    dfs(walk, g.start);
    return memo_.emplace(name, std::move(walk.results)).first->second;
  }

  struct Walk {
    const Graph* g = nullptr;
    std::vector<std::string>* stack = nullptr;
    std::vector<Node> path;
    std::vector<CoveredFlow> covered;
    std::set<std::pair<std::string, std::string>> covered_keys;
    std::vector<BranchRecord> branches;
    std::map<int, int> visits;
    std::vector<Partial> results;
  };

  struct Checkpoint {
    size_t path, covered, branches;
  };

  static Checkpoint mark(const Walk& w) {
    return {w.path.size(), w.covered.size(), w.branches.size()};
  }

  static void rollback(Walk& w, const Checkpoint& cp) {
    for (size_t i = cp.covered; i < w.covered.size(); ++i)
      w.covered_keys.erase({w.covered[i].use_case, w.covered[i].flow_id});
    w.path.resize(cp.path);
    w.covered.resize(cp.covered);
    w.branches.resize(cp.branches);
  }

  void record_coverage(Walk& w, const Node& n) {
    if (n.label.empty()) return;
    if (!w.covered_keys.insert({n.use_case, n.flow_id}).second) return;
    CoveredFlow cf;
    cf.use_case = n.use_case;
    cf.flow_id = n.flow_id;
    const UseCase* uc = doc_.find(n.use_case);
    if (const Flow* f = uc ? uc->find_flow(n.flow_id) : nullptr)
      cf.provenance = f->provenance;
    w.covered.push_back(std::move(cf));
  }

  void append_sub(Walk& w, const Partial& sub) {
    for (const Node& n : sub.path) {
      w.path.push_back(n);
      record_coverage(w, n);
    }
    for (const auto& b : sub.branches) w.branches.push_back(b);
  }

  void emit(Walk& w, bool aborts) {
    Partial p;
    p.path = w.path;
    p.covered = w.covered;
    p.branches = w.branches;
    p.aborts = aborts;
    w.results.push_back(std::move(p));
  }

  void dfs(Walk& w, int id) {
    if (w.path.size() > kPathCap) {
      throw Error(ErrorCode::MalformedFlow,
                  "scenario paths of '" + w.g->use_case +
                      "' do not terminate");
    }
    const Node& n = w.g->nodes[id];
    Checkpoint cp = mark(w);
    w.path.push_back(n);
    record_coverage(w, n);

    switch (n.kind) {
      case NodeKind::Exit:
        emit(w, false);
        break;
      case NodeKind::Abort:
        emit(w, true);
        break;
      case NodeKind::Include:
        expand_include(w, id);
        break;
      case NodeKind::Condition:
        branch(w, id);
        break;
      default:
        dfs(w, n.next);
        break;
    }
    rollback(w, cp);
  }

  void expand_include(Walk& w, int id) {
    const Node& n = w.g->nodes[id];
    auto& stack = *w.stack;
    if (std::find(stack.begin(), stack.end(), n.target) != stack.end()) {
      std::string chain;
      for (const auto& s : stack) chain += s + " -> ";
      throw Error(ErrorCode::IncludeCycle,
                  "use case inclusion cycles: " + chain + n.target);
    }
    stack.push_back(n.target);
    const std::vector<Partial>& subs = enumerate_uc(n.target, stack);
    stack.pop_back();

    int next = n.next;
    for (const Partial& sub : subs) {
      Checkpoint cp = mark(w);
      append_sub(w, sub);
      if (sub.aborts)
        emit(w, true);
      else
        dfs(w, next);
      rollback(w, cp);
    }
  }

  void branch(Walk& w, int id) {
    const Node& n = w.g->nodes[id];
    // Guards (synthetic conditions) continue past the flow on false;
    // validation steps continue on true.
    bool exit_branch = !n.label.empty();
    int seen = w.visits[id]++;
    if (seen >= 1) {
      w.branches.push_back({n.origin, exit_branch});
      dfs(w, exit_branch ? n.true_next : n.false_next);
    } else {
      w.branches.push_back({n.origin, true});
      dfs(w, n.true_next);
      w.branches.pop_back();
      w.branches.push_back({n.origin, false});
      dfs(w, n.false_next);
      w.branches.pop_back();
    }
    w.visits[id]--;
  }

  void finalize(Scenario& s) { compute_stats(s, doc_); }

  const UseCaseDocument& doc_;
  std::map<std::string, std::vector<Partial>> memo_;
};

}  // namespace

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Start: return "start";
    case NodeKind::Interaction: return "interaction";
    case NodeKind::Internal: return "internal";
    case NodeKind::Condition: return "condition";
    case NodeKind::Include: return "include";
    case NodeKind::Exit: return "exit";
    case NodeKind::Abort: return "abort";
  }
  return "?";
}

bool Scenario::covers(const std::string& uc, const std::string& flow) const {
  for (const auto& cf : covered_flows)
    if (cf.use_case == uc && cf.flow_id == flow) return true;
  return false;
}

void compute_stats(Scenario& s, const UseCaseDocument& doc) {
  int steps = 0;
  std::set<std::string> decisions;
  std::set<std::string> use_cases;
  for (const Node& n : s.path) {
    switch (n.kind) {
      case NodeKind::Interaction:
      case NodeKind::Internal:
      case NodeKind::Condition:
      case NodeKind::Include:
        ++steps;
        break;
      default:
        break;
    }
    if (!n.provenance.empty()) decisions.insert(n.provenance);
    use_cases.insert(n.use_case);
  }
  for (const auto& cf : s.covered_flows)
    if (!cf.provenance.empty()) decisions.insert(cf.provenance);
  for (const auto& name : use_cases) {
    const UseCase* uc = doc.find(name);
    if (uc && !uc->provenance.empty()) decisions.insert(uc->provenance);
  }
  s.size_s = steps;
  s.size_v = static_cast<int>(decisions.size());
}

Graph build_graph(const UseCaseDocument& doc, const UseCase& uc) {
  return Builder(doc, uc).build();
}

std::vector<Scenario> enumerate_scenarios(const UseCaseDocument& doc,
                                          const std::string& root) {
  return Enumerator(doc).run(root);
}

std::vector<std::string> root_use_cases(const UseCaseDocument& doc) {
  std::set<std::string> included;
  for (const auto& uc : doc.use_cases) {
    auto scan = [&](const Flow& f) {
      for (const auto& s : f.steps)
        if (s.kind == StepKind::IncludeUseCase) included.insert(s.target);
    };
    scan(uc.basic_flow);
    for (const auto& f : uc.alternative_flows) scan(f);
  }
  std::vector<std::string> roots;
  for (const auto& uc : doc.use_cases)
    if (!included.count(uc.name)) roots.push_back(uc.name);
  return roots;
}

std::vector<Scenario> enumerate_document(const UseCaseDocument& doc) {
  std::vector<Scenario> out;
  for (const auto& root : root_use_cases(doc)) {
    auto scenarios = enumerate_scenarios(doc, root);
    out.insert(out.end(), std::make_move_iterator(scenarios.begin()),
               std::make_move_iterator(scenarios.end()));
  }
  return out;
}

}  // namespace plucase::scenario
