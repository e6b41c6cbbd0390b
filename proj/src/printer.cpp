#include <algorithm>
#include <cctype>
#include <sstream>

#include "tbp/parser.hpp"

namespace tbp {

namespace {

std::string tv_text(TimeValue t) {
  return t.infinite() ? std::string("+INF") : std::to_string(t.value());
}

std::string bound_text(const Bound& b) {
  return "[" + tv_text(b.lb) + ", " + tv_text(b.ub) + "]";
}

std::string rel_keyword(RelKind k) {
  std::string n = rel_name(k);
  for (char& c : n) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return n;
}

std::string arg_list(const std::vector<std::string>& args) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i];
  }
  return out + ")";
}

void print_relation_body(std::ostringstream& os, RelKind kind, const std::vector<Bound>& bounds,
                         const std::optional<TimeValue>& anchor, const std::string& right) {
  os << rel_keyword(kind);
  for (const auto& b : bounds) os << ' ' << bound_text(b);
  if (rel_is_point(kind))
    os << ' ' << (anchor ? tv_text(*anchor) : std::string("0"));
  else
    os << ' ' << right;
  os << ";\n";
}

}  // namespace

std::string pretty_print(const LiftedDomain& d) {
  std::ostringstream os;
  os << "DOMAIN " << d.name << " {\n";
  os << "  TEMPORAL_MODULE " << (d.module_name.empty() ? "tm" : d.module_name) << " = [0, "
     << tv_text(d.horizon) << "];\n";

  for (const auto& pd : d.parameters) {
    if (pd.numeric) {
      os << "  PAR_TYPE NumericParameter " << pd.name << " = [" << pd.lo << ", " << pd.hi
         << "];\n";
    } else {
      os << "  PAR_TYPE EnumerationParameter " << pd.name << " = { ";
      for (std::size_t i = 0; i < pd.symbols.size(); ++i) {
        if (i) os << ", ";
        os << pd.symbols[i];
      }
      os << " };\n";
    }
  }

  for (const auto& t : d.types) {
    os << "  COMP_TYPE StateVariable " << (t.external ? "external " : "") << t.name << " (";
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      const auto& v = t.values[i];
      if (i) os << ", ";
      os << v.name << "(";
      for (std::size_t j = 0; j < v.param_types.size(); ++j) {
        if (j) os << ", ";
        os << v.param_types[j];
      }
      os << ")";
    }
    os << ") {\n";
    for (const auto& v : t.values) {
      os << "    VALUE " << (v.tag == Controllability::uncontrollable ? "uncontrollable " : "")
         << v.name << arg_list(v.params) << " [" << tv_text(v.dmin) << ", " << tv_text(v.dmax)
         << "] MEETS {\n";
      for (const auto& s : v.successors) os << "      " << s.value << arg_list(s.args) << ";\n";
      for (const auto& c : v.constraints)
        os << "      " << c.lhs << (c.equal ? " = " : " != ") << c.rhs << ";\n";
      os << "    }\n";
    }
    os << "  }\n";
  }

  for (const auto& c : d.components) os << "  COMPONENT " << c.name << " : " << c.type << ";\n";

  // Rules grouped per component, components in first-occurrence order. A
  // component without rules gets no SYNCHRONIZE section at all.
  std::vector<std::string> order;
  for (const auto& r : d.rules)
    if (std::find(order.begin(), order.end(), r.component) == order.end())
      order.push_back(r.component);
  for (const auto& comp : order) {
    os << "  SYNCHRONIZE " << comp << " {\n";
    for (const auto& r : d.rules) {
      if (r.component != comp) continue;
      os << "    VALUE " << r.trigger_value << arg_list(r.trigger_params) << " {\n";
      for (const auto& c : r.conditions)
        os << "      " << c.label << (c.label.empty() ? "" : " ") << c.component << "." << c.value
           << arg_list(c.args) << ";\n";
      for (const auto& rel : r.relations) {
        os << "      ";
        if (!rel.left.empty()) os << rel.left << ' ';
        print_relation_body(os, rel.kind, rel.bounds, rel.anchor, rel.right);
      }
      for (const auto& c : r.constraints)
        os << "      " << c.lhs << (c.equal ? " = " : " != ") << c.rhs << ";\n";
      os << "    }\n";
    }
    os << "  }\n";
  }

  os << "}\n";
  return os.str();
}

std::string pretty_print(const LiftedProblem& p) {
  std::ostringstream os;
  os << "PROBLEM " << p.name << " (DOMAIN " << p.domain_name << ") {\n";
  for (const auto& s : p.statements) {
    os << "  " << s.label << ' ' << (s.is_goal ? "goal" : "fact") << ' ' << s.component << '.'
       << s.value << arg_list(s.args);
    if (s.has_at)
      os << " AT " << bound_text(s.start) << ' ' << bound_text(s.end) << ' '
         << bound_text(s.duration);
    os << ";\n";
  }
  for (const auto& r : p.relations) {
    os << "  " << r.left << ' ';
    print_relation_body(os, r.kind, r.bounds, r.anchor, r.right);
  }
  for (const auto& b : p.bindings) os << "  " << b.var << " = " << b.value << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace tbp
