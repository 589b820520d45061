#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dlpcf/derivation.hpp"

namespace dlpcf {

namespace {

struct RuleName {
  Rule rule;
  const char* name;
};

constexpr RuleName kRuleNames[] = {
    {Rule::Ax, "ax"},
    {Rule::Subs, "subs"},
    {Rule::Lam, "lam"},
    {Rule::App, "app"},
    {Rule::If, "if"},
    {Rule::Const, "const"},
    {Rule::Succ, "succ"},
    {Rule::Pred, "pred"},
    {Rule::Fix, "fix"},
    {Rule::FixGen, "fixgen"},
    {Rule::Closure, "closure"},
    {Rule::Process, "process"},
    {Rule::StackEmpty, "stack-empty"},
    {Rule::StackSubs, "stack-subs"},
    {Rule::StackArg, "stack-arg"},
    {Rule::StackFun, "stack-fun"},
    {Rule::StackFork, "stack-fork"},
    {Rule::StackS, "stack-s"},
    {Rule::StackP, "stack-p"},
};

[[noreturn]] void fail_at(const SExpr& e, const std::string& msg) {
  throw ScriptError(e.pos.str() + ": " + msg);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

// Replaces whole identifiers using `table`; non-identifier replacements are
// parenthesized.
std::string replace_identifiers(const std::string& s,
                                const std::map<std::string, std::string>& table,
                                bool parenthesize_all) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_ident_start(s[i]) && (i == 0 || !is_ident_char(s[i - 1]))) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      std::string word = s.substr(i, j - i);
      auto it = table.find(word);
      if (it == table.end()) {
        out += word;
      } else if (!parenthesize_all && is_identifier(it->second)) {
        out += it->second;
      } else {
        out += "(" + it->second + ")";
      }
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

class Expander {
 public:
  void define(const SExpr& form) {
    if (form.items.size() != 3 || !form.items[1].is_atom())
      fail_at(form, "expected (define NAME value)");
    const std::string& name = form.items[1].text;
    const SExpr& value = form.items[2];
    if (value.is_string()) {
      strings_[name] = expand_string(value.text);
    } else {
      trees_[name] = expand(value);
    }
  }

  SExpr expand(const SExpr& e) const {
    if (e.is_atom()) {
      if (auto it = trees_.find(e.text); it != trees_.end()) return it->second;
      if (auto it = strings_.find(e.text); it != strings_.end()) {
        SExpr out = SExpr::string("(" + it->second + ")");
        out.pos = e.pos;
        return out;
      }
      return e;
    }
    if (e.is_string()) {
      SExpr out = e;
      out.text = expand_string(e.text);
      return out;
    }
    if (e.head() == "rename") return rename(e);
    SExpr out = e;
    out.items.clear();
    for (const auto& x : e.items) out.items.push_back(expand(x));
    return out;
  }

 private:
  std::string expand_string(const std::string& s) const {
    return strings_.empty() ? s : replace_identifiers(s, strings_, true);
  }

  // (rename ((old new) ...) body): simultaneous renaming of identifiers in
  // every string and atom of the expanded body.
  SExpr rename(const SExpr& e) const {
    if (e.items.size() != 3 || !e.items[1].is_list())
      fail_at(e, "expected (rename ((old new) ...) body)");
    std::map<std::string, std::string> table;
    for (const auto& p : e.items[1].items) {
      if (!p.is_list() || p.items.size() != 2 || !p.items[0].is_atom() || p.items[1].is_list())
        fail_at(p, "expected (old new)");
      table[p.items[0].text] = p.items[1].is_string() ? expand_string(p.items[1].text)
                                                      : p.items[1].text;
    }
    return apply_rename(expand(e.items[2]), table);
  }

  static SExpr apply_rename(const SExpr& e, const std::map<std::string, std::string>& table) {
    SExpr out = e;
    if (e.is_string()) {
      out.text = replace_identifiers(e.text, table, false);
    } else if (e.is_atom()) {
      auto it = table.find(e.text);
      if (it != table.end() && is_identifier(it->second)) out.text = it->second;
    } else {
      out.items.clear();
      for (const auto& x : e.items) out.items.push_back(apply_rename(x, table));
    }
    return out;
  }

  std::map<std::string, std::string> strings_;
  std::map<std::string, SExpr> trees_;
};

const std::string& text_of(const SExpr& e) {
  if (e.is_list()) fail_at(e, "expected a string or atom");
  return e.text;
}

template <class F>
auto parsed(const SExpr& e, const char* what, F f) -> decltype(f(std::string_view{})) {
  try {
    return f(text_of(e));
  } catch (const ParseError& err) {
    fail_at(e, std::string("bad ") + what + " '" + e.text + "': " + err.what());
  }
}

Index index_of(const SExpr& e) { return parsed(e, "index", parse_index); }
ModalType type_of(const SExpr& e) { return parsed(e, "type", parse_type); }
Term term_of(const SExpr& e) { return parsed(e, "term", parse_term); }

const SExpr& single(const SExpr& field) {
  if (field.items.size() != 2) fail_at(field, "field '" + field.head() + "' takes one value");
  return field.items[1];
}

ConstraintSet constraints_of(const SExpr& field) {
  ConstraintSet out;
  for (std::size_t k = 1; k < field.items.size(); ++k) {
    const SExpr& c = field.items[k];
    if (!c.is_list() || c.items.size() != 3 || !c.items[0].is_atom())
      fail_at(c, "expected (op I J)");
    const std::string& op = c.items[0].text;
    Index l = index_of(c.items[1]);
    Index r = index_of(c.items[2]);
    if (op == "<=") {
      out.push_back({l, r});
    } else if (op == ">=") {
      out.push_back({r, l});
    } else if (op == "<") {
      out.push_back({l + Index::lit(1), r});
    } else if (op == ">") {
      out.push_back({r + Index::lit(1), l});
    } else if (op == "=") {
      out.push_back({l, r});
      out.push_back({r, l});
    } else {
      fail_at(c, "unknown comparison '" + op + "'");
    }
  }
  return out;
}

VarSet vars_of(const SExpr& field) {
  VarSet vs;
  for (std::size_t j = 1; j < field.items.size(); ++j) {
    if (!field.items[j].is_atom()) fail_at(field.items[j], "expected a variable name");
    vs.insert(field.items[j].text);
  }
  return vs;
}

void witness_of(const SExpr& field, Derivation& d) {
  for (std::size_t k = 1; k < field.items.size(); ++k) {
    const SExpr& w = field.items[k];
    std::string h = w.head();
    if (h == "binder" && w.items.size() == 2 && w.items[1].is_atom()) {
      d.binder = w.items[1].text;
    } else if (h == "bound") {
      d.bound = index_of(single(w));
    } else if (h == "sum" && w.items.size() == 3 && w.items[1].is_atom()) {
      d.sums.insert_or_assign(w.items[1].text, type_of(w.items[2]));
    } else {
      fail_at(w, "unknown witness");
    }
  }
}

}  // namespace

std::string to_string(Rule r) {
  for (const auto& rn : kRuleNames) {
    if (rn.rule == r) return rn.name;
  }
  return "?";
}

std::optional<Rule> rule_from_name(std::string_view name) {
  for (const auto& rn : kRuleNames) {
    if (name == rn.name) return rn.rule;
  }
  return std::nullopt;
}

bool is_term_rule(Rule r) { return r <= Rule::FixGen; }
bool is_stack_rule(Rule r) { return r >= Rule::StackEmpty; }

Derivation derivation_from_sexpr(const SExpr& e) {
  auto rule = rule_from_name(e.head());
  if (!rule) fail_at(e, "expected a derivation node, found " + to_string(e));
  Derivation d;
  d.rule = *rule;
  d.pos = e.pos;
  for (std::size_t k = 1; k < e.items.size(); ++k) {
    const SExpr& f = e.items[k];
    std::string h = f.head();
    if (rule_from_name(h)) {
      d.premises.push_back(derivation_from_sexpr(f));
    } else if (h == "vars") {
      d.vars = vars_of(f);
    } else if (h == "constraints") {
      d.hyps = constraints_of(f);
    } else if (h == "ctx") {
      for (std::size_t j = 1; j < f.items.size(); ++j) {
        const SExpr& b = f.items[j];
        if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_atom())
          fail_at(b, "expected (x type)");
        if (!d.ctx.emplace(b.items[0].text, type_of(b.items[1])).second)
          fail_at(b, "variable '" + b.items[0].text + "' bound twice");
      }
    } else if (h == "weight") {
      d.weight = index_of(single(f));
    } else if (h == "term") {
      d.term = term_of(single(f));
    } else if (h == "type" || h == "output") {
      d.type = type_of(single(f));
    } else if (h == "input") {
      d.input = type_of(single(f));
    } else if (h == "witness") {
      witness_of(f, d);
    } else if (h == "env") {
      for (std::size_t j = 1; j < f.items.size(); ++j) {
        const SExpr& b = f.items[j];
        if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_atom())
          fail_at(b, "expected (x closure-derivation)");
        d.env_names.push_back(b.items[0].text);
        d.env.push_back(derivation_from_sexpr(b.items[1]));
      }
    } else {
      fail_at(f, "unknown field '" + (h.empty() ? to_string(f) : h) + "'");
    }
  }
  return d;
}

namespace {

SExpr field(const char* name, std::vector<SExpr> xs) {
  xs.insert(xs.begin(), SExpr::atom(name));
  return SExpr::list(std::move(xs));
}

SExpr str(std::string s) { return SExpr::string(std::move(s)); }

SExpr constraint_sexpr(const Constraint& c) {
  return SExpr::list({SExpr::atom("<="), str(to_string(c.lhs)), str(to_string(c.rhs))});
}

}  // namespace

SExpr to_sexpr(const Derivation& d) {
  std::vector<SExpr> xs{SExpr::atom(to_string(d.rule))};
  if (d.vars) {
    std::vector<SExpr> vs;
    for (const auto& v : *d.vars) vs.push_back(SExpr::atom(v));
    xs.push_back(field("vars", vs));
  }
  if (d.hyps) {
    std::vector<SExpr> cs;
    for (const auto& c : *d.hyps) cs.push_back(constraint_sexpr(c));
    xs.push_back(field("constraints", cs));
  }
  if (!d.ctx.empty()) {
    std::vector<SExpr> bs;
    for (const auto& [x, t] : d.ctx) bs.push_back(SExpr::list({SExpr::atom(x), str(to_string(t))}));
    xs.push_back(field("ctx", bs));
  }
  if (d.weight) xs.push_back(field("weight", {str(to_string(*d.weight))}));
  if (d.term) xs.push_back(field("term", {str(to_string(*d.term))}));
  if (d.input) xs.push_back(field("input", {str(to_string(*d.input))}));
  if (d.type) {
    xs.push_back(field(is_stack_rule(d.rule) ? "output" : "type", {str(to_string(*d.type))}));
  }
  std::vector<SExpr> ws;
  if (d.binder) ws.push_back(SExpr::list({SExpr::atom("binder"), SExpr::atom(*d.binder)}));
  if (d.bound) ws.push_back(SExpr::list({SExpr::atom("bound"), str(to_string(*d.bound))}));
  for (const auto& [x, t] : d.sums)
    ws.push_back(SExpr::list({SExpr::atom("sum"), SExpr::atom(x), str(to_string(t))}));
  if (!ws.empty()) xs.push_back(field("witness", ws));
  if (!d.env.empty()) {
    std::vector<SExpr> bs;
    for (std::size_t k = 0; k < d.env.size(); ++k)
      bs.push_back(SExpr::list({SExpr::atom(d.env_names[k]), to_sexpr(d.env[k])}));
    xs.push_back(field("env", bs));
  }
  for (const auto& p : d.premises) xs.push_back(to_sexpr(p));
  return SExpr::list(std::move(xs));
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScriptError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<SExpr> read_forms(std::string_view text) {
  try {
    return read_sexprs(text);
  } catch (const ParseError& e) {
    throw ScriptError(e.what());
  }
}

class Loader {
 public:
  explicit Loader(std::filesystem::path base) : base_(std::move(base)) {}

  // Included files only contribute their program and definitions.
  void run(const std::vector<SExpr>& forms, bool library, int depth) {
    for (const auto& form : forms) {
      std::string h = form.head();
      if (h == "ep") {
        program(form);
      } else if (h == "define") {
        ex_.define(form);
      } else if (h == "include") {
        include(form, depth);
      } else if (h == "derivation" || h == "sequence") {
        if (!library) derivation(form);
      } else if (h == "driver") {
        if (!library) driver(form);
      } else {
        fail_at(form, "unknown top-level form '" + (h.empty() ? to_string(form) : h) + "'");
      }
    }
  }

  Script finish() {
    s_.ep = EquationalProgram(std::move(defs_));
    try {
      s_.ep.validate();
    } catch (const IndexError& e) {
      throw ScriptError(std::string("equational program: ") + e.what());
    }
    return std::move(s_);
  }

 private:
  void program(const SExpr& form) {
    for (std::size_t k = 1; k < form.items.size(); ++k) {
      if (!form.items[k].is_string()) fail_at(form.items[k], "expected a program string");
      EquationalProgram part;
      try {
        part = parse_ep(form.items[k].text);
      } catch (const ParseError& e) {
        fail_at(form.items[k], std::string("bad equational program: ") + e.what());
      }
      for (const auto& d : part.definitions()) defs_.push_back(d);
    }
  }

  void include(const SExpr& form, int depth) {
    if (form.items.size() != 2 || !form.items[1].is_string())
      fail_at(form, "expected (include \"file\")");
    if (depth > 16) fail_at(form, "includes nest too deeply");
    std::filesystem::path path = base_ / form.items[1].text;
    std::vector<SExpr> forms;
    try {
      forms = read_forms(slurp(path));
    } catch (const ScriptError& e) {
      fail_at(form, e.what());
    }
    std::filesystem::path saved = base_;
    base_ = path.parent_path();
    run(forms, true, depth + 1);
    base_ = saved;
  }

  void derivation(const SExpr& form) {
    const std::string h = form.head();
    std::size_t k = 1;
    std::string name;
    if (k < form.items.size() && form.items[k].is_string()) name = form.items[k++].text;
    // (derivation name (vars ..) (constraints ..) root) sets the root scope.
    std::optional<VarSet> vars;
    std::optional<ConstraintSet> hyps;
    std::vector<Derivation> nodes;
    for (; k < form.items.size(); ++k) {
      SExpr e = ex_.expand(form.items[k]);
      if (h == "derivation" && e.head() == "vars") {
        vars = vars_of(e);
      } else if (h == "derivation" && e.head() == "constraints") {
        hyps = constraints_of(e);
      } else {
        nodes.push_back(derivation_from_sexpr(e));
      }
    }
    if (h == "derivation") {
      if (nodes.size() != 1) fail_at(form, "a derivation has exactly one root");
      if (vars) nodes[0].vars = vars;
      if (hyps) nodes[0].hyps = hyps;
      s_.derivations.push_back({name, std::move(nodes[0])});
    } else {
      s_.sequences.push_back({name, std::move(nodes)});
    }
  }

  void driver(const SExpr& form) {
    Driver drv;
    for (std::size_t k = 1; k < form.items.size(); ++k) {
      const SExpr& f = form.items[k];
      if (f.head() != "args") fail_at(f, "expected (args sym ...)");
      for (std::size_t j = 1; j < f.items.size(); ++j) drv.args.push_back(text_of(f.items[j]));
    }
    s_.driver = std::move(drv);
  }

  std::filesystem::path base_;
  Expander ex_;
  std::vector<Definition> defs_;
  Script s_;
};

}  // namespace

Script load_script(std::string_view text, const std::string& base_dir) {
  Loader loader(base_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(base_dir));
  loader.run(read_forms(text), false, 0);
  return loader.finish();
}

Script load_script_file(const std::string& path) {
  try {
    std::filesystem::path p(path);
    return load_script(slurp(p), p.parent_path().string());
  } catch (const ScriptError& e) {
    throw ScriptError(path + ":" + e.what());
  }
}

std::string format_script(const Script& s) {
  std::string out;
  if (!s.ep.definitions().empty()) out += "(ep " + to_string(SExpr::string(to_string(s.ep))) + ")\n";
  for (const auto& nd : s.derivations) {
    out += "(derivation ";
    if (!nd.name.empty()) out += to_string(SExpr::string(nd.name)) + " ";
    out += to_string(to_sexpr(nd.root)) + ")\n";
  }
  for (const auto& seq : s.sequences) {
    out += "(sequence";
    if (!seq.name.empty()) out += " " + to_string(SExpr::string(seq.name));
    for (const auto& p : seq.processes) out += "\n  " + to_string(to_sexpr(p));
    out += ")\n";
  }
  if (s.driver) {
    out += "(driver (args";
    for (const auto& a : s.driver->args) out += " " + a;
    out += "))\n";
  }
  return out;
}

}  // namespace dlpcf
