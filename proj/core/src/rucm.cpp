#include "plucase/rucm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "plucase/text.hpp"

namespace plucase::rucm {

namespace {

constexpr std::string_view kVariantMark = "⟨VARIANT⟩";
constexpr std::string_view kOptionalMark = "⟨OPTIONAL⟩";
constexpr std::string_view kVpOpen = "⟨VARIATION POINT";
constexpr std::string_view kVpClose = "⟩";

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

bool is_step_number(std::string_view s) {
  if (s.empty()) return false;
  if (s[0] == 'V') return all_digits(s.substr(1));
  return all_digits(s);
}

std::string strip_period(std::string_view s) {
  std::string out = text::trim(s);
  if (!out.empty() && out.back() == '.') out.pop_back();
  return text::trim(out);
}

// ----- Parser -----

struct Line {
  std::string content;
  int number;
};

class Parser {
 public:
  Parser(std::string_view content, std::string source_path)
      : source_path_(std::move(source_path)) {
    int n = 0;
    for (auto& raw : text::split(content, '\n')) {
      ++n;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      std::string t = text::trim(raw);
      if (!t.empty()) lines_.push_back({t, n});
    }
  }

  UseCaseDocument run() {
    UseCaseDocument doc;
    doc.source_path = source_path_;
    if (lines_.empty()) {
      throw Error(ErrorCode::SyntaxError, "empty document", 1);
    }
    while (!at_end()) {
      doc.use_cases.push_back(parse_use_case());
    }
    check_unique_names(doc);
    for (auto& uc : doc.use_cases) {
      resolve_references(uc);
      assign_origins(uc);
    }
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= lines_.size(); }
  const Line& peek() const { return lines_[pos_]; }
  const Line& next() { return lines_[pos_++]; }

  static bool is_use_case_header(std::string_view s) {
    return text::starts_with(s, "USE CASE ") ||
           text::starts_with(s, std::string(kVariantMark) + " USE CASE ");
  }

  // Flow headers look like "1.2 ..."; steps like "2. ..." or "V1. ...".
  static bool is_flow_header(std::string_view s) {
    return s.size() > 2 && s[0] == '1' && s[1] == '.' &&
           std::isdigit(static_cast<unsigned char>(s[2]));
  }

  UseCase parse_use_case() {
    UseCase uc;
    const Line& header = next();
    std::string_view rest = header.content;
    if (text::starts_with(rest, kVariantMark)) {
      uc.variant = true;
      rest.remove_prefix(kVariantMark.size());
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    }
    if (!text::starts_with(rest, "USE CASE ")) {
      throw Error(ErrorCode::SyntaxError, "expected USE CASE header, got '" +
                                              header.content + "'",
                  header.number);
    }
    uc.name = text::trim(rest.substr(9));
    if (uc.name.empty()) {
      throw Error(ErrorCode::SyntaxError, "use case without a name",
                  header.number);
    }

    if (!at_end() && text::starts_with(peek().content, "Precondition:")) {
      uc.precondition = text::trim(next().content.substr(13));
    }

    bool have_basic = false;
    while (!at_end() && is_flow_header(peek().content)) {
      Flow flow = parse_flow();
      if (flow.kind == FlowKind::Basic) {
        if (have_basic) {
          throw Error(ErrorCode::SyntaxError,
                      "use case '" + uc.name + "' has more than one basic flow",
                      peek_prev_line_);
        }
        have_basic = true;
        uc.basic_flow = std::move(flow);
      } else {
        if (!have_basic) {
          throw Error(ErrorCode::SyntaxError,
                      "alternative flow before the basic flow in '" + uc.name +
                          "'",
                      peek_prev_line_);
        }
        uc.alternative_flows.push_back(std::move(flow));
      }
    }
    if (!have_basic) {
      throw Error(ErrorCode::SyntaxError,
                  "use case '" + uc.name + "' has no basic flow",
                  header.number);
    }
    if (!at_end() && !is_use_case_header(peek().content)) {
      throw Error(ErrorCode::SyntaxError,
                  "unexpected line '" + peek().content + "'", peek().number);
    }

    std::set<std::string> flow_ids{uc.basic_flow.id};
    for (const auto& f : uc.alternative_flows) {
      if (!flow_ids.insert(f.id).second) {
        throw Error(ErrorCode::SyntaxError,
                    "duplicate flow id '" + f.id + "' in '" + uc.name + "'",
                    header.number);
      }
    }
    return uc;
  }

  Flow parse_flow() {
    const Line& header = next();
    peek_prev_line_ = header.number;
    Flow flow;

    size_t sp = header.content.find(' ');
    if (sp == std::string::npos) {
      throw Error(ErrorCode::SyntaxError, "malformed flow header",
                  header.number);
    }
    std::string rest = text::trim(header.content.substr(sp + 1));
    if (text::starts_with(rest, kOptionalMark)) {
      flow.optional = true;
      rest = text::trim(rest.substr(kOptionalMark.size()));
    }

    auto take_id = [&](std::string_view tail) -> std::string {
      std::string t = text::trim(tail);
      if (t.empty()) return "";
      if (t.front() != '(' || t.back() != ')') {
        throw Error(ErrorCode::SyntaxError,
                    "malformed flow identifier '" + t + "'", header.number);
      }
      return text::trim(t.substr(1, t.size() - 2));
    };

    if (text::starts_with(rest, "Basic Flow")) {
      flow.kind = FlowKind::Basic;
      std::string id = take_id(rest.substr(10));
      flow.id = id.empty() ? "BF" : id;
    } else if (text::starts_with(rest, "Specific Alternative Flow")) {
      flow.kind = FlowKind::SpecificAlt;
      flow.id = take_id(rest.substr(25));
    } else if (text::starts_with(rest, "Bounded Alternative Flow")) {
      flow.kind = FlowKind::BoundedAlt;
      flow.id = take_id(rest.substr(24));
    } else if (text::starts_with(rest, "Global Alternative Flow")) {
      flow.kind = FlowKind::GlobalAlt;
      flow.id = take_id(rest.substr(23));
    } else {
      throw Error(ErrorCode::SyntaxError,
                  "unknown flow kind in header '" + header.content + "'",
                  header.number);
    }
    if (flow.kind != FlowKind::Basic && flow.id.empty()) {
      throw Error(ErrorCode::SyntaxError,
                  "alternative flow requires an identifier in parentheses",
                  header.number);
    }

    if (!at_end() && text::starts_with(peek().content, "RFS")) {
      const Line& rfs_line = next();
      if (flow.kind == FlowKind::Basic || flow.kind == FlowKind::GlobalAlt) {
        throw Error(ErrorCode::SyntaxError,
                    "RFS is not allowed on a " +
                        std::string(to_string(flow.kind)) + " flow",
                    rfs_line.number);
      }
      flow.rfs = parse_refs(text::trim(rfs_line.content.substr(3)),
                            rfs_line.number);
      last_rfs_line_ = rfs_line.number;
    } else if (flow.kind == FlowKind::SpecificAlt ||
               flow.kind == FlowKind::BoundedAlt) {
      throw Error(ErrorCode::SyntaxError,
                  "flow '" + flow.id + "' requires an RFS line",
                  header.number);
    }
    if (flow.kind == FlowKind::SpecificAlt && flow.rfs.size() != 1) {
      throw Error(ErrorCode::SyntaxError,
                  "specific alternative flow '" + flow.id +
                      "' must reference exactly one step",
                  header.number);
    }

    bool in_guard = false;
    if ((flow.kind == FlowKind::BoundedAlt ||
         flow.kind == FlowKind::GlobalAlt) &&
        !at_end() && text::starts_with(peek().content, "IF ")) {
      const Line& guard_line = next();
      std::string g = guard_line.content.substr(3);
      if (!g.ends_with(" THEN")) {
        throw Error(ErrorCode::SyntaxError, "IF line must end with THEN",
                    guard_line.number);
      }
      flow.guard = text::trim(g.substr(0, g.size() - 5));
      in_guard = true;
    }

    while (!at_end()) {
      const Line& line = peek();
      if (line.content == "ENDIF") {
        if (!in_guard) {
          throw Error(ErrorCode::SyntaxError, "ENDIF without IF", line.number);
        }
        next();
        in_guard = false;
        break;
      }
      size_t dot = line.content.find(". ");
      if (dot == std::string::npos || !is_step_number(line.content.substr(0, dot))) {
        break;
      }
      next();
      flow.steps.push_back(parse_step(line, line.content.substr(0, dot),
                                      text::trim(line.content.substr(dot + 2))));
    }
    if (in_guard) {
      throw Error(ErrorCode::SyntaxError,
                  "flow '" + flow.id + "' is missing ENDIF", header.number);
    }
    if (flow.steps.empty()) {
      throw Error(ErrorCode::SyntaxError, "flow '" + flow.id + "' has no steps",
                  header.number);
    }
    return flow;
  }

  Step parse_step(const Line& line, std::string number, std::string body) {
    bool optional = false;
    if (text::starts_with(body, kOptionalMark)) {
      optional = true;
      body = text::trim(body.substr(kOptionalMark.size()));
    }
    Step step = classify_step(body);
    step.number = std::move(number);
    step.optional = optional;
    if (step.kind == StepKind::Internal &&
        body.find(kVpOpen) != std::string::npos) {
      throw Error(ErrorCode::SyntaxError,
                  "malformed variation point include '" + body + "'",
                  line.number);
    }
    return step;
  }

  std::vector<StepRef> parse_refs(std::string_view spec, int line) {
    std::vector<StepRef> refs;
    for (auto& tok : text::split(spec, ',')) {
      std::string t = text::trim(tok);
      if (t.empty()) {
        throw Error(ErrorCode::SyntaxError, "empty RFS reference", line);
      }
      std::string flow_id = "BF";
      size_t dot = t.find('.');
      if (dot != std::string::npos) {
        flow_id = t.substr(0, dot);
        t = t.substr(dot + 1);
      }
      size_t dash = t.find('-');
      if (dash != std::string::npos && all_digits(t.substr(0, dash)) &&
          all_digits(t.substr(dash + 1))) {
        int lo = std::stoi(t.substr(0, dash));
        int hi = std::stoi(t.substr(dash + 1));
        if (lo > hi) {
          throw Error(ErrorCode::SyntaxError, "invalid RFS range " + t, line);
        }
        for (int n = lo; n <= hi; ++n) {
          refs.push_back({flow_id, std::to_string(n)});
        }
      } else if (is_step_number(t)) {
        refs.push_back({flow_id, t});
      } else {
        throw Error(ErrorCode::SyntaxError, "invalid RFS reference '" + t + "'",
                    line);
      }
    }
    return refs;
  }

  void check_unique_names(const UseCaseDocument& doc) {
    std::set<std::string> names;
    for (const auto& uc : doc.use_cases) {
      if (!names.insert(uc.name).second) {
        throw Error(ErrorCode::SyntaxError,
                    "duplicate use case name '" + uc.name + "'");
      }
    }
  }

  void resolve_references(const UseCase& uc) {
    auto find_flow = [&](std::string_view id) -> const Flow* {
      return uc.find_flow(id);
    };
    auto check = [&](const Flow& flow) {
      for (const auto& ref : flow.rfs) {
        const Flow* target = find_flow(ref.flow_id);
        if (!target) {
          throw Error(ErrorCode::DanglingReference,
                      "flow '" + flow.id + "' in '" + uc.name +
                          "' references unknown flow '" + ref.flow_id + "'",
                      last_rfs_line_);
        }
        bool found = std::any_of(
            target->steps.begin(), target->steps.end(),
            [&](const Step& s) { return s.number == ref.number; });
        if (!found) {
          throw Error(ErrorCode::DanglingReference,
                      "flow '" + flow.id + "' in '" + uc.name +
                          "' references nonexistent step " + ref.flow_id +
                          "." + ref.number,
                      last_rfs_line_);
        }
      }
    };
    for (const auto& f : uc.alternative_flows) check(f);
  }

  void assign_origins(UseCase& uc) {
    auto stamp = [&](Flow& flow) {
      for (auto& step : flow.steps) {
        step.origin = uc.name + "|" + flow.id + "|" + step.number;
      }
    };
    stamp(uc.basic_flow);
    for (auto& f : uc.alternative_flows) stamp(f);
  }

  std::vector<Line> lines_;
  size_t pos_ = 0;
  int peek_prev_line_ = 0;
  int last_rfs_line_ = 0;
  std::string source_path_;
};

}  // namespace

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Input: return "input";
    case StepKind::Output: return "output";
    case StepKind::Condition: return "condition";
    case StepKind::Internal: return "internal";
    case StepKind::IncludeUseCase: return "include-use-case";
    case StepKind::IncludeVariationPoint: return "include-variation-point";
    case StepKind::Abort: return "abort";
    case StepKind::ExitImplicit: return "exit";
  }
  return "?";
}

const char* to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::Basic: return "basic";
    case FlowKind::SpecificAlt: return "specific";
    case FlowKind::BoundedAlt: return "bounded";
    case FlowKind::GlobalAlt: return "global";
  }
  return "?";
}

const Flow* UseCase::find_flow(std::string_view id) const {
  if (basic_flow.id == id) return &basic_flow;
  for (const auto& f : alternative_flows) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const UseCase* UseCaseDocument::find(std::string_view name) const {
  for (const auto& uc : use_cases) {
    if (uc.name == name) return &uc;
  }
  return nullptr;
}

bool structurally_equal(const Step& a, const Step& b) {
  return a.number == b.number && a.optional == b.optional && a.kind == b.kind &&
         a.text == b.text;
}

bool structurally_equal(const Flow& a, const Flow& b) {
  if (a.id != b.id || a.kind != b.kind || a.optional != b.optional ||
      a.rfs != b.rfs || a.guard != b.guard || a.steps.size() != b.steps.size()) {
    return false;
  }
  for (size_t i = 0; i < a.steps.size(); ++i) {
    if (!structurally_equal(a.steps[i], b.steps[i])) return false;
  }
  return true;
}

bool structurally_equal(const UseCase& a, const UseCase& b) {
  if (a.name != b.name || a.variant != b.variant ||
      a.precondition != b.precondition ||
      a.alternative_flows.size() != b.alternative_flows.size() ||
      !structurally_equal(a.basic_flow, b.basic_flow)) {
    return false;
  }
  for (size_t i = 0; i < a.alternative_flows.size(); ++i) {
    if (!structurally_equal(a.alternative_flows[i], b.alternative_flows[i])) {
      return false;
    }
  }
  return true;
}

bool structurally_equal(const UseCaseDocument& a, const UseCaseDocument& b) {
  if (a.use_cases.size() != b.use_cases.size()) return false;
  for (size_t i = 0; i < a.use_cases.size(); ++i) {
    if (!structurally_equal(a.use_cases[i], b.use_cases[i])) return false;
  }
  return true;
}

UseCaseDocument parse_specification(std::string_view content,
                                    std::string source_path) {
  return Parser(content, std::move(source_path)).run();
}

UseCaseDocument read_specification(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_specification(buf.str(), path);
}

Step classify_step(std::string_view step_text) {
  Step step;
  step.text = text::trim(step_text);
  const std::string& t = step.text;

  if (text::starts_with(t, "INCLUDE USE CASE ")) {
    step.kind = StepKind::IncludeUseCase;
    step.target = strip_period(t.substr(17));
    return step;
  }
  if (text::starts_with(t, std::string("INCLUDE ") + std::string(kVpOpen))) {
    size_t open = t.find(kVpOpen);
    size_t colon = t.find(':', open);
    size_t close = t.find(kVpClose, open + kVpOpen.size());
    if (colon != std::string::npos && close != std::string::npos &&
        colon < close) {
      step.kind = StepKind::IncludeVariationPoint;
      step.target = text::trim(t.substr(colon + 1, close - colon - 1));
      return step;
    }
    return step;  // malformed: Internal fallback, parser rejects separately
  }
  if (strip_period(t) == "ABORT") {
    step.kind = StepKind::Abort;
    return step;
  }
  size_t validates = t.find("VALIDATES THAT ");
  if (validates != std::string::npos) {
    step.kind = StepKind::Condition;
    step.condition = strip_period(t.substr(validates + 15));
    return step;
  }
  size_t requests = t.find(" REQUESTS ");
  if (requests != std::string::npos) {
    size_t from = t.find(" FROM ", requests + 10);
    if (from != std::string::npos) {
      step.kind = StepKind::Input;
      step.entity = text::trim(t.substr(requests + 10, from - requests - 10));
      step.actor = strip_period(t.substr(from + 6));
      return step;
    }
  }
  size_t sends = t.find(" SENDS ");
  if (sends != std::string::npos) {
    size_t to = t.find(" TO ", sends + 7);
    if (to != std::string::npos) {
      std::string subject = text::trim(t.substr(0, sends));
      step.entity = text::trim(t.substr(sends + 7, to - sends - 7));
      if (text::to_lower(subject) == "the system") {
        step.kind = StepKind::Output;
        step.actor = strip_period(t.substr(to + 4));
      } else {
        step.kind = StepKind::Input;
        step.actor = subject;
      }
      return step;
    }
  }
  step.kind = StepKind::Internal;
  return step;
}

namespace {

std::string serialize_refs(const std::vector<StepRef>& refs) {
  // Contiguous numeric runs within one flow compress to "lo-hi".
  std::vector<std::string> parts;
  size_t i = 0;
  while (i < refs.size()) {
    const auto& ref = refs[i];
    std::string prefix = ref.flow_id == "BF" ? "" : ref.flow_id + ".";
    if (all_digits(ref.number)) {
      int lo = std::stoi(ref.number);
      int hi = lo;
      size_t j = i + 1;
      while (j < refs.size() && refs[j].flow_id == ref.flow_id &&
             all_digits(refs[j].number) &&
             std::stoi(refs[j].number) == hi + 1) {
        hi = std::stoi(refs[j].number);
        ++j;
      }
      if (hi > lo) {
        parts.push_back(prefix + std::to_string(lo) + "-" + std::to_string(hi));
        i = j;
        continue;
      }
    }
    parts.push_back(prefix + ref.number);
    ++i;
  }
  return text::join(parts, ", ");
}

void serialize_flow(std::ostringstream& out, const Flow& flow, int index) {
  out << "1." << index << ' ';
  if (flow.optional) out << kOptionalMark << ' ';
  switch (flow.kind) {
    case FlowKind::Basic:
      out << "Basic Flow";
      if (flow.id != "BF") out << " (" << flow.id << ")";
      break;
    case FlowKind::SpecificAlt:
      out << "Specific Alternative Flow (" << flow.id << ")";
      break;
    case FlowKind::BoundedAlt:
      out << "Bounded Alternative Flow (" << flow.id << ")";
      break;
    case FlowKind::GlobalAlt:
      out << "Global Alternative Flow (" << flow.id << ")";
      break;
  }
  out << '\n';
  if (!flow.rfs.empty()) out << "RFS " << serialize_refs(flow.rfs) << '\n';
  bool guarded = !flow.guard.empty();
  if (guarded) out << "IF " << flow.guard << " THEN\n";
  for (const auto& step : flow.steps) {
    out << step.number << ". ";
    if (step.optional) out << kOptionalMark << ' ';
    out << step.text << '\n';
  }
  if (guarded) out << "ENDIF\n";
}

}  // namespace

std::string serialize_specification(const UseCaseDocument& doc) {
  std::ostringstream out;
  bool first = true;
  for (const auto& uc : doc.use_cases) {
    if (!first) out << '\n';
    first = false;
    if (uc.variant) out << kVariantMark << ' ';
    out << "USE CASE " << uc.name << '\n';
    if (!uc.precondition.empty()) {
      out << "Precondition: " << uc.precondition << '\n';
    }
    int index = 1;
    serialize_flow(out, uc.basic_flow, index++);
    for (const auto& flow : uc.alternative_flows) {
      serialize_flow(out, flow, index++);
    }
  }
  return out.str();
}

Findings validate_document(const UseCaseDocument& doc) {
  Findings findings;
  auto warn = [&](const std::string& rule, const std::string& msg) {
    findings.push_back({Finding::Severity::Warning, rule, msg});
  };
  for (const auto& uc : doc.use_cases) {
    // Specific alternative flows should anchor at a condition step.
    for (const auto& flow : uc.alternative_flows) {
      if (flow.kind == FlowKind::SpecificAlt && !flow.rfs.empty()) {
        const Flow* target = uc.find_flow(flow.rfs[0].flow_id);
        if (target) {
          for (const auto& step : target->steps) {
            if (step.number == flow.rfs[0].number &&
                step.kind != StepKind::Condition) {
              warn("specific-anchor",
                   "flow '" + flow.id + "' in '" + uc.name +
                       "' references step " + step.number +
                       ", which is not a condition");
            }
          }
        }
      }
      if (flow.kind == FlowKind::GlobalAlt) {
        for (const auto& step : flow.steps) {
          if (step.kind == StepKind::IncludeVariationPoint) {
            warn("global-vp-include",
                 "global flow '" + flow.id + "' in '" + uc.name +
                     "' includes variation point '" + step.target + "'");
          }
        }
      }
      if ((flow.kind == FlowKind::BoundedAlt ||
           flow.kind == FlowKind::GlobalAlt) &&
          flow.guard.empty()) {
        warn("missing-guard", "flow '" + flow.id + "' in '" + uc.name +
                                  "' has no IF..THEN guard");
      }
    }
    // Conditions without an alternative flow fall back to an implicit
    // abort branch in the scenario graph.
    auto check_conditions = [&](const Flow& flow) {
      for (const auto& step : flow.steps) {
        if (step.kind != StepKind::Condition) continue;
        bool anchored = false;
        for (const auto& alt : uc.alternative_flows) {
          if (alt.kind != FlowKind::SpecificAlt) continue;
          if (!alt.rfs.empty() && alt.rfs[0].flow_id == flow.id &&
              alt.rfs[0].number == step.number) {
            anchored = true;
          }
        }
        if (!anchored && !step.condition.starts_with('\'')) {
          warn("condition-without-flow",
               "condition step " + flow.id + "." + step.number + " in '" +
                   uc.name + "' has no alternative flow (implicit abort)");
        }
      }
    };
    check_conditions(uc.basic_flow);
    for (const auto& flow : uc.alternative_flows) check_conditions(flow);
    // Use case includes must resolve within the document.
    auto check_includes = [&](const Flow& flow) {
      for (const auto& step : flow.steps) {
        if (step.kind == StepKind::IncludeUseCase && !doc.find(step.target)) {
          findings.push_back({Finding::Severity::Violation, "unresolved-include",
                              "'" + uc.name + "' includes unknown use case '" +
                                  step.target + "'"});
        }
      }
    };
    check_includes(uc.basic_flow);
    for (const auto& flow : uc.alternative_flows) check_includes(flow);
  }
  return findings;
}

}  // namespace plucase::rucm
