#include "tbp/plan_io.hpp"

#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace tbp {

namespace {

using json = nlohmann::ordered_json;

json tv_json(TimeValue v) {
  if (v.infinite()) return "+inf";
  return v.value();
}

json bound_json(const Bound& b) { return json::array({tv_json(b.lb), tv_json(b.ub)}); }

const char* tag_text(Controllability c) {
  return c == Controllability::uncontrollable ? "u" : "c";
}

// Collects diagnostics keyed by JSON paths like "timelines[1].tokens[0].end".
// Any error leaves the result empty; parsing continues where it can so one
// pass reports independent mistakes together.
class Reader {
 public:
  std::vector<Diagnostic> diags;

  std::optional<FlexiblePlan> run(const std::string& text) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      fail("plan", e.what());
      return std::nullopt;
    }
    if (!doc.is_object()) {
      fail("plan", "top level must be an object");
      return std::nullopt;
    }

    FlexiblePlan plan;
    if (auto* v = field(doc, "domain", "plan"); v && expect_string(*v, "domain"))
      plan.domain = v->get<std::string>();
    if (auto* v = field(doc, "horizon", "plan"); v)
      if (auto t = time_value(*v, "horizon")) plan.horizon = *t;
    if (auto* v = field(doc, "timelines", "plan"); v) read_timelines(*v, plan);
    if (auto* v = field(doc, "relations", "plan"); v) read_relations(*v, plan);
    if (auto* v = field(doc, "pseudo_controllable", "plan"); v) {
      if (v->is_boolean())
        plan.pseudo_controllable = v->get<bool>();
      else
        fail("pseudo_controllable", "expected a boolean");
    }

    check_references(plan);
    if (!diags.empty()) return std::nullopt;
    return plan;
  }

 private:
  void fail(std::string where, std::string message) {
    diags.push_back({std::move(where), std::move(message)});
  }

  const json* field(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) {
      fail(where, std::string("missing field \"") + key + "\"");
      return nullptr;
    }
    return &*it;
  }

  bool expect_string(const json& j, const std::string& where) {
    if (j.is_string()) return true;
    fail(where, "expected a string");
    return false;
  }

  std::optional<TimeValue> time_value(const json& j, const std::string& where) {
    if (j.is_string()) {
      if (j.get<std::string>() == "+inf") return TimeValue::inf();
      fail(where, "expected a number or \"+inf\"");
      return std::nullopt;
    }
    if (j.is_number_integer()) {
      ticks_t n = j.get<ticks_t>();
      if (n < 0) {
        fail(where, "time values are non-negative");
        return std::nullopt;
      }
      return TimeValue::of(n);
    }
    fail(where, "expected a number or \"+inf\"");
    return std::nullopt;
  }

  std::optional<Bound> bound(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) {
      fail(where, "expected a [lb, ub] pair");
      return std::nullopt;
    }
    auto lo = time_value(j[0], where);
    auto hi = time_value(j[1], where);
    if (!lo || !hi) return std::nullopt;
    try {
      return Bound(*lo, *hi);
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
      return std::nullopt;
    }
  }

  void read_timelines(const json& j, FlexiblePlan& plan) {
    if (!j.is_array()) {
      fail("timelines", "expected an array");
      return;
    }
    for (std::size_t ti = 0; ti < j.size(); ++ti) {
      std::string where = "timelines[" + std::to_string(ti) + "]";
      const json& jt = j[ti];
      if (!jt.is_object()) {
        fail(where, "expected an object");
        continue;
      }
      PlanTimeline tl;
      if (auto* v = field(jt, "variable", where); v && expect_string(*v, where + ".variable"))
        tl.variable = v->get<std::string>();
      if (!tl.variable.empty() && plan.find_timeline(tl.variable))
        fail(where, "duplicate timeline for " + tl.variable);
      if (auto* v = field(jt, "tokens", where); v) read_tokens(*v, where, tl);
      plan.timelines.push_back(std::move(tl));
    }
  }

  void read_tokens(const json& j, const std::string& where, PlanTimeline& tl) {
    if (!j.is_array()) {
      fail(where + ".tokens", "expected an array");
      return;
    }
    for (std::size_t ki = 0; ki < j.size(); ++ki) {
      std::string twhere = where + ".tokens[" + std::to_string(ki) + "]";
      const json& jk = j[ki];
      if (!jk.is_object()) {
        fail(twhere, "expected an object");
        continue;
      }
      PlanToken tok;
      if (auto* v = field(jk, "value", twhere); v && expect_string(*v, twhere + ".value"))
        tok.value = v->get<std::string>();
      if (auto* v = field(jk, "end", twhere); v)
        if (auto b = bound(*v, twhere + ".end")) tok.end = *b;
      if (auto* v = field(jk, "duration", twhere); v)
        if (auto b = bound(*v, twhere + ".duration")) tok.duration = *b;
      if (auto* v = field(jk, "tag", twhere); v) {
        std::string tag = v->is_string() ? v->get<std::string>() : std::string();
        if (tag == "c")
          tok.tag = Controllability::controllable;
        else if (tag == "u")
          tok.tag = Controllability::uncontrollable;
        else
          fail(twhere + ".tag", "expected \"c\" or \"u\"");
      }
      tl.tokens.push_back(std::move(tok));
    }
  }

  std::optional<TokenName> token_ref(const json& j, const std::string& where) {
    if (j.is_string())
      if (auto name = TokenName::parse(j.get<std::string>())) return name;
    fail(where, "expected a token reference like \"cm.2\"");
    return std::nullopt;
  }

  void read_relations(const json& j, FlexiblePlan& plan) {
    if (!j.is_array()) {
      fail("relations", "expected an array");
      return;
    }
    for (std::size_t ri = 0; ri < j.size(); ++ri) {
      std::string where = "relations[" + std::to_string(ri) + "]";
      const json& jr = j[ri];
      if (!jr.is_object()) {
        fail(where, "expected an object");
        continue;
      }
      PlanRelation rel;
      bool sound = true;
      if (auto* v = field(jr, "left", where)) {
        if (auto name = token_ref(*v, where + ".left"))
          rel.left = *name;
        else
          sound = false;
      } else {
        sound = false;
      }

      std::optional<RelKind> kind;
      if (auto* v = field(jr, "kind", where)) {
        if (v->is_string()) kind = rel_from_name(v->get<std::string>());
        if (!kind) {
          fail(where + ".kind", "unknown relation kind");
          sound = false;
        }
      } else {
        sound = false;
      }

      std::vector<Bound> bounds;
      if (auto* v = field(jr, "bounds", where)) {
        if (!v->is_array()) {
          fail(where + ".bounds", "expected an array of pairs");
          sound = false;
        } else {
          for (std::size_t bi = 0; bi < v->size(); ++bi) {
            if (auto b = bound((*v)[bi], where + ".bounds[" + std::to_string(bi) + "]"))
              bounds.push_back(*b);
            else
              sound = false;
          }
        }
      } else {
        sound = false;
      }

      std::optional<TimeValue> anchor;
      if (auto* v = field(jr, "right", where); v && kind) {
        if (rel_is_point(*kind)) {
          anchor = time_value(*v, where + ".right");
          if (!anchor) sound = false;
          if (anchor && anchor->infinite()) {
            fail(where + ".right", "point relation anchors must be finite");
            sound = false;
          }
        } else if (auto name = token_ref(*v, where + ".right")) {
          rel.right = *name;
        } else {
          sound = false;
        }
      } else if (!v) {
        sound = false;
      }

      if (!sound) continue;
      try {
        rel.relation = Relation(*kind, std::move(bounds), anchor);
      } catch (const std::invalid_argument& e) {
        fail(where, e.what());
        continue;
      }
      plan.relations.push_back(std::move(rel));
    }
  }

  void check_references(const FlexiblePlan& plan) {
    for (const auto& rel : plan.relations) {
      if (!plan.find_token(rel.left))
        fail(rel.left.text(), "relation operand names no token");
      if (!rel_is_point(rel.relation.kind) && !plan.find_token(rel.right))
        fail(rel.right.text(), "relation operand names no token");
    }
  }
};

}  // namespace

std::string write_plan(const FlexiblePlan& plan) {
  json j;
  j["domain"] = plan.domain;
  j["horizon"] = tv_json(plan.horizon);

  json timelines = json::array();
  for (const auto& tl : plan.timelines) {
    json jt;
    jt["variable"] = tl.variable;
    json tokens = json::array();
    for (const auto& tok : tl.tokens) {
      json jk;
      jk["value"] = tok.value;
      jk["end"] = bound_json(tok.end);
      jk["duration"] = bound_json(tok.duration);
      jk["tag"] = tag_text(tok.tag);
      tokens.push_back(std::move(jk));
    }
    jt["tokens"] = std::move(tokens);
    timelines.push_back(std::move(jt));
  }
  j["timelines"] = std::move(timelines);

  json relations = json::array();
  for (const auto& rel : plan.relations) {
    json jr;
    jr["left"] = rel.left.text();
    jr["kind"] = rel_name(rel.relation.kind);
    json bounds = json::array();
    for (const auto& b : rel.relation.bounds) bounds.push_back(bound_json(b));
    jr["bounds"] = std::move(bounds);
    if (rel_is_point(rel.relation.kind))
      jr["right"] = tv_json(rel.relation.anchor.value_or(TimeValue::of(0)));
    else
      jr["right"] = rel.right.text();
    relations.push_back(std::move(jr));
  }
  j["relations"] = std::move(relations);

  j["pseudo_controllable"] = plan.pseudo_controllable;
  return j.dump(2) + "\n";
}

PlanReadResult read_plan(const std::string& text) {
  Reader reader;
  PlanReadResult out;
  out.plan = reader.run(text);
  out.diagnostics = std::move(reader.diags);
  return out;
}

}  // namespace tbp
