#include <doctest.h>

#include "corpus.hpp"
#include "dlpcf/checker.hpp"
#include "metatheory.hpp"

using namespace dlpcf;

namespace {

CheckConfig bounded(Nat b) {
  CheckConfig c;
  c.entail.bound = b;
  return c;
}

const Script& add_script() {
  static const Script s = load_script_file(corpus::script("add.dlpcf"));
  return s;
}

const Script& mult_script() {
  static const Script s = load_script_file(corpus::script("mult.dlpcf"));
  return s;
}

CheckReport check_text(std::string_view text, const CheckConfig& cfg = bounded(8)) {
  Script s = load_script(text);
  REQUIRE(s.derivations.size() == 1);
  return check(s.derivations[0].root, s.ep, cfg);
}

Nat eval_closed(const Index& i, const Assignment& rho, const EquationalProgram& ep) {
  auto v = eval_index(i, rho, ep);
  REQUIRE(v);
  return *v;
}

}  // namespace

TEST_CASE("axiom") {
  auto ok = check_text(R"((derivation (ax (ctx (x "Nat[3]")) (weight "0") (term "x") (type "Nat[3]"))))");
  CHECK(ok.overall == Overall::Certified);
  CHECK(to_string(*ok.type) == "Nat[3]");

  auto heavy = check_text(R"((derivation (ax (ctx (x "Nat[3]")) (weight "1") (term "x") (type "Nat[3]"))))");
  CHECK(heavy.overall == Overall::Refuted);
  CHECK(heavy.location == "root");

  auto missing = check_text(R"((derivation (ax (weight "0") (term "x") (type "Nat[3]"))))");
  CHECK(missing.overall == Overall::Refuted);
  CHECK(missing.reason.find("not in the context") != std::string::npos);
}

TEST_CASE("structural failures need no entailment") {
  auto r = check_text(R"((derivation (lam (weight "1") (term "0") (type "Nat[0]"))))");
  CHECK(r.overall == Overall::Refuted);
  CHECK(r.obligation_count() == 0);
}

TEST_CASE("index variables must be in scope") {
  auto r = check_text(R"((derivation (const (weight "k") (term "0") (type "Nat[0]"))))");
  CHECK(r.overall == Overall::Refuted);
}

TEST_CASE("add is certified with weight 3(f+1)") {
  const Script& s = add_script();
  CheckReport r = check(s.derivations[0].root, s.ep, bounded(16));
  INFO(format_report(r));
  REQUIRE(r.overall == Overall::CertifiedBounded);
  CHECK(r.bound == 16);
  CHECK_FALSE(r.general_fix);
  REQUIRE(r.weight);
  for (Nat f = 0; f <= 8; ++f) {
    CHECK(eval_closed(*r.weight, {{"f", f}, {"g", 4}}, s.ep) == 3 * (f + 1));
  }
  CHECK(to_string(*r.type) == "[a < 1] (Nat[f] -o [c < 1] (Nat[g] -o Nat[f + g]))");
}

TEST_CASE("mult is certified") {
  const Script& s = mult_script();
  CheckReport r = check(s.derivations[0].root, s.ep, bounded(10));
  INFO(format_report(r));
  REQUIRE(r.certified());
  REQUIRE(r.weight);
  // One unit per call, two per abstraction layer, and an addition on every
  // call but the last.
  for (Nat f = 0; f <= 5; ++f) {
    for (Nat g = 0; g <= 5; ++g) {
      CHECK(eval_closed(*r.weight, {{"f", f}, {"g", g}}, s.ep) == 3 * (f + 1) + f * (3 * g + 3));
    }
  }
}

TEST_CASE("weight_of") {
  const Derivation& d = add_script().derivations[0].root;
  CHECK(to_string(weight_of(d)) == to_string(*d.weight));
  Script s = load_script_file(corpus::script("machine/judgements.dlpcf"));
  for (const auto& nd : s.derivations) {
    if (nd.name != "halted") continue;
    // The process leaves nothing implicit here; drop the annotation.
    Derivation p = nd.root;
    p.weight.reset();
    CHECK(eval_closed(weight_of(p), {}, s.ep) == 0);
  }
}

TEST_CASE("instantiation") {
  const Script& a = add_script();
  Derivation add23 = instantiate(a.derivations[0].root, {{"f", 2}, {"g", 3}});
  CHECK(eval_closed(*add23.weight, {}, a.ep) == 9);
  CHECK(check(add23, a.ep, bounded(8)).certified());

  const Script& m = mult_script();
  Derivation mult05 = instantiate(m.derivations[0].root, {{"f", 0}, {"g", 5}});
  CHECK(eval_closed(*mult05.weight, {}, m.ep) == 3);

  CHECK_THROWS_AS(instantiate(a.derivations[0].root, {{"h", 1}}), ScriptError);
}

TEST_CASE("weakening rejects names already bound") {
  const Derivation& d = add_script().derivations[0].root;
  CHECK_THROWS_AS(weaken(d, "y", parse_type("Nat[0]")), ScriptError);
  CHECK_THROWS_AS(weaken(d, "x", parse_type("Nat[0]")), ScriptError);
}

TEST_CASE("metatheory transformations preserve certification") {
  for (const auto& c : metatheory::cases()) {
    INFO(c.name);
    const Script& s = c.script == "add.dlpcf" ? add_script() : mult_script();
    Derivation t = c.transform(s.derivations[0].root);
    CheckReport r = check(t, s.ep, bounded(8));
    INFO(format_report(r));
    CHECK(r.certified());
  }
}

TEST_CASE("strengthening can only help") {
  // An unsatisfiable extra hypothesis makes every obligation vacuous.
  const Script& s = add_script();
  Derivation d = strengthen(s.derivations[0].root, {metatheory::le("f + 1", "f")});
  CHECK(check(d, s.ep, bounded(8)).certified());
}

TEST_CASE("erasure gives a simply typed derivation") {
  for (const Script* s : {&add_script(), &mult_script()}) {
    PcfDerivation p = erase(s->derivations[0].root);
    SimpleType nat = SimpleType::nat();
    CHECK(p.type == SimpleType::arrow(nat, SimpleType::arrow(nat, nat)));
    CHECK(p.rule == Rule::Fix);
    CHECK_FALSE(validate_pcf_derivation(p));
  }
  // Subsumption leaves nothing behind.
  PcfDerivation z = erase(add_script().derivations[0].root.premises[0].premises[0].premises[0]);
  CHECK(z.premises[1].rule == Rule::Ax);

  PcfDerivation bad = erase(add_script().derivations[0].root);
  bad.premises[0].type = SimpleType::nat();
  CHECK(validate_pcf_derivation(bad));
}

TEST_CASE("strict mode demands equal subsumptions") {
  const char* text = R"(
    (derivation (subs (weight "1") (term "0") (type "Nat[0, 1]")
      (const (weight "0") (term "0") (type "Nat[0]")))))";
  CHECK(check_text(text).certified());
  CheckConfig strict = bounded(8);
  strict.strict = true;
  auto r = check_text(text, strict);
  CHECK(r.overall == Overall::Refuted);
  CHECK(r.location == "root");

  // The add derivation only uses subsumption where both sides agree.
  const Script& s = add_script();
  CHECK(check(s.derivations[0].root, s.ep, strict).certified());
}

TEST_CASE("subsumption direction") {
  auto narrower = check_text(R"(
    (derivation (subs (weight "0") (term "0") (type "Nat[0]")
      (const (weight "0") (term "0") (type "Nat[0, 1]")))))");
  CHECK(narrower.overall == Overall::Refuted);
  auto lighter = check_text(R"(
    (derivation (subs (weight "0") (term "0") (type "Nat[0]")
      (const (weight "1") (term "0") (type "Nat[0]")))))");
  CHECK(lighter.overall == Overall::Refuted);
}

TEST_CASE("general fixpoints may overestimate the recursion tree") {
  std::string text = corpus::read_file(corpus::script("add.dlpcf"));
  auto replace = [&](const std::string& from, const std::string& to) {
    auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), to);
  };
  replace("(fix (witness (binder b))", "(fixgen (witness (binder b) (bound \"f + 2\"))");
  replace("(weight \"f + 1 + sum(b < f + 1) (1 + 1)\")", "(weight \"f + 2 + sum(b < f + 2) (1 + 1)\")");
  replace("(< b \"f + 1\")", "(< b \"f + 2\")");
  replace("(< b \"f + 1\")", "(< b \"f + 2\")");
  Script s = load_script(text);
  CheckReport r = check(s.derivations[0].root, s.ep, bounded(8));
  INFO(format_report(r));
  CHECK(r.certified());
  CHECK(r.general_fix);

  // The plain rule insists on the exact size.
  replace("(fixgen", "(fix");
  Script plain = load_script(text);
  CHECK(check(plain.derivations[0].root, plain.ep, bounded(8)).overall == Overall::Refuted);
}

TEST_CASE("every corpus derivation outside the mutants is certified") {
  for (const auto& sub : {std::string("."), std::string("machine")}) {
    for (const auto& path : corpus::scripts(sub)) {
      if (path.filename() == "contravariance.dlpcf" || path.filename() == "mult.dlpcf") continue;
      INFO(path.string());
      Script s = load_script_file(path.string());
      for (const auto& nd : s.derivations) {
        INFO(nd.name);
        CHECK(check(nd.root, s.ep, bounded(8)).certified());
      }
    }
  }
}

TEST_CASE("mutants are refuted at the mutated node") {
  auto paths = corpus::scripts("mutants");
  CHECK(paths.size() >= 6);
  for (const auto& path : paths) {
    INFO(path.string());
    Script s = load_script_file(path.string());
    REQUIRE(s.derivations.size() == 1);
    CheckReport r = check(s.derivations[0].root, s.ep, bounded(8));
    CHECK(r.overall == Overall::Refuted);
    CHECK(r.location == corpus::expected_location(path));
  }
}

TEST_CASE("report format") {
  auto r = check_text(R"((derivation (ax (ctx (x "Nat[3]")) (weight "1") (term "x") (type "Nat[3]"))))");
  std::string text = format_report(r);
  CHECK(text.rfind("status=Refuted\nlocation=root\n", 0) == 0);
  CHECK(text.find("|= 1 <= 0") != std::string::npos);
  CHECK(format_report(r, true).size() > text.size());
}
