#include <doctest.h>

#include "dlpcf/types.hpp"
#include "gen_types.hpp"

using namespace dlpcf;

namespace {

const EquationalProgram kNoDefs;

EntailConfig bound(Nat b) {
  EntailConfig c;
  c.bound = b;
  return c;
}

Status sub(const std::string& s, const std::string& t, VarSet vars = {},
           ConstraintSet hyps = {}) {
  return subtype(vars, hyps, parse_type(s), parse_type(t), kNoDefs, bound(16)).status;
}

Status eqv(const std::string& s, const std::string& t, VarSet vars = {},
           ConstraintSet hyps = {}) {
  return type_equiv(vars, hyps, parse_type(s), parse_type(t), kNoDefs, bound(16)).status;
}

Constraint le(const std::string& l, const std::string& r) {
  return {parse_index(l), parse_index(r)};
}

VarSet vars_of(const ModalType& t) {
  auto fv = free_vars(t);
  return {fv.begin(), fv.end()};
}

}  // namespace

TEST_CASE("parse and print") {
  CHECK(to_string(parse_type("Nat[3]")) == "Nat[3]");
  CHECK(to_string(parse_type("Nat[a, a+1]")) == "Nat[a, a + 1]");
  CHECK(to_string(parse_type("[a<1] (Nat[f] -o [c<1] (Nat[g] -o Nat[f+g]))")) ==
        "[a < 1] (Nat[f] -o [c < 1] (Nat[g] -o Nat[f + g]))");
  CHECK(parse_type("[a<1] Nat[0] -o Nat[0]") == parse_type("[a<1] (Nat[0] -o Nat[0])"));
  CHECK(parse_type("[a<1] (Nat[0]) -o Nat[0]") == parse_type("[a<1] (Nat[0] -o Nat[0])"));
  CHECK(parse_type("Nat[2,2]") == parse_type("Nat[2]"));
  CHECK_THROWS_AS(parse_type("Nat[1"), ParseError);
  CHECK_THROWS_AS(parse_type("[a<1] Nat[0]"), ParseError);
  CHECK_THROWS_AS(parse_type("Int"), ParseError);

  gen::TypeGen g(5, {"x", "y"});
  for (int n = 0; n < 300; ++n) {
    ModalType t = g.type(3);
    CHECK(parse_type(to_string(t)) == t);
  }
}

TEST_CASE("substitution") {
  CHECK(subst_type(parse_type("Nat[a,a]"), "a", Index::lit(3)) == parse_type("Nat[3,3]"));
  ModalType t = parse_type("[b<a] (Nat[b] -o Nat[a])");
  CHECK(subst_type(t, "a", Index::lit(2)) == parse_type("[b<2] (Nat[b] -o Nat[2])"));
  // the binder is renamed away from the image
  CHECK(to_string(subst_type(t, "a", Index::var("b"))) == "[b' < b] (Nat[b'] -o Nat[b])");
  // bound variable untouched
  CHECK(subst_type(t, "b", Index::lit(9)) == t);
  ModalType sigma = parse_type("Nat[a]");
  ModalType tau = parse_type("Nat[a+1]");
  // tau{0/a} as produced by an application
  CHECK(subst_type(tau, "a", Index::lit(0)) == parse_type("Nat[0+1]"));
  CHECK(subst_type(sigma, {{"a", Index::var("c")}}) == parse_type("Nat[c]"));
}

TEST_CASE("erasure") {
  CHECK(erase_type(parse_type("[a<1] (Nat[f] -o Nat[f+g])")) ==
        SimpleType::arrow(SimpleType::nat(), SimpleType::nat()));
  CHECK(erase_type(parse_type("Nat[0, 9]")) == SimpleType::nat());
  CHECK(same_skeleton(parse_type("[a<4] (Nat[1] -o Nat[a])"),
                      parse_type("[b<0] (Nat[0] -o Nat[7])")));
  CHECK_FALSE(same_skeleton(parse_type("Nat[1]"), parse_type("[b<0] (Nat[0] -o Nat[7])")));
}

TEST_CASE("subtyping") {
  CHECK(sub("Nat[2,7]", "Nat[0,10]") == Status::Valid);
  CHECK(sub("Nat[0,1]", "Nat[2,3]") == Status::Invalid);
  CHECK(sub("[a<3] (Nat[a] -o Nat[a])", "[a<2] (Nat[a] -o Nat[a])") == Status::Valid);
  CHECK(sub("[a<2] (Nat[a] -o Nat[a])", "[a<3] (Nat[a] -o Nat[a])") == Status::Invalid);
  // contravariant domain
  CHECK(sub("[a<1] (Nat[0,5] -o Nat[1])", "[a<1] (Nat[1,2] -o Nat[0,3])") == Status::Valid);
  CHECK(sub("[a<1] (Nat[1,2] -o Nat[1])", "[a<1] (Nat[0,5] -o Nat[1])") == Status::Invalid);
  // the body is checked only for a below the smaller bound
  CHECK(sub("[a<5] (Nat[0] -o Nat[a])", "[b<2] (Nat[0] -o Nat[0,1])") == Status::Valid);
  CHECK(sub("[a<5] (Nat[0] -o Nat[a])", "[b<3] (Nat[0] -o Nat[0,1])") == Status::Invalid);
  // binder names do not matter, even when one clashes with a free variable
  CHECK(sub("[a<x] (Nat[a] -o Nat[x])", "[x<x] (Nat[x] -o Nat[x+1])", {"x"}) ==
        Status::Invalid);
  CHECK(sub("[a<x] (Nat[a] -o Nat[x])", "[b<x] (Nat[b] -o Nat[x])", {"x"}) == Status::Valid);

  auto v = subtype({}, {}, parse_type("Nat[1]"), parse_type("[a<1] (Nat[0] -o Nat[0])"),
                   kNoDefs, bound(16));
  CHECK(v.status == Status::Invalid);
  CHECK(v.reason.find("skeleton") != std::string::npos);
  CHECK(v.discharged.empty());

  // hypotheses matter
  CHECK(sub("Nat[x]", "Nat[0,3]", {"x"}) == Status::Invalid);
  CHECK(sub("Nat[x]", "Nat[0,3]", {"x"}, {le("x", "3")}) == Status::Valid);
}

TEST_CASE("equivalence") {
  CHECK(eqv("Nat[a+1]", "Nat[1+a]", {"a"}) == Status::Valid);
  CHECK(eqv("Nat[a]", "Nat[a+1]", {"a"}) == Status::Invalid);
  // C{b+1/b} == A in the addition derivation: H(b+1) = J(b) as f - b - 1
  ModalType c = parse_type("[a<1] (Nat[f -. b] -o [c<1] (Nat[g] -o Nat[(f -. b) + g]))");
  ModalType a = parse_type("[a<1] (Nat[f -. b -. 1] -o [c<1] (Nat[g] -o Nat[(f -. b -. 1) + g]))");
  auto v = type_equiv({"b", "f", "g"}, {less_than("b", parse_index("f+1"))},
                      subst_type(c, "b", parse_index("b+1")), a, kNoDefs, bound(12));
  CHECK(v.status == Status::Valid);
}

TEST_CASE("sums of modal types") {
  VarSet none;
  auto nat = sum_modal(parse_type("Nat[5]"), parse_type("Nat[5]"), std::nullopt, none, {});
  REQUIRE(nat.type);
  CHECK(*nat.type == parse_type("Nat[5]"));
  CHECK(discharge(nat.goals, kNoDefs, bound(8)).status == Status::Valid);

  auto bad_nat = sum_modal(parse_type("Nat[5]"), parse_type("Nat[4]"), std::nullopt, none, {});
  CHECK(discharge(bad_nat.goals, kNoDefs, bound(8)).status == Status::Invalid);

  // first two and next three instances of A = Nat[c] -o Nat[c]
  LinearType a{parse_type("Nat[c]"), parse_type("Nat[c]")};
  SumWitness w{"c", a, Index::lit(2), Index::lit(3)};
  auto ok = sum_modal(parse_type("[a<2] (Nat[a] -o Nat[a])"),
                      parse_type("[b<3] (Nat[2+b] -o Nat[b+2])"), w, none, {});
  REQUIRE(ok.type);
  CHECK(to_string(*ok.type) == "[c < 2 + 3] (Nat[c] -o Nat[c])");
  CHECK(discharge(ok.goals, kNoDefs, bound(8)).status == Status::Valid);

  // the shifted copy forces index 1 where the generic body says 0
  LinearType zero{parse_type("Nat[0]"), parse_type("Nat[0]")};
  auto bad = sum_modal(parse_type("[a<1] (Nat[a] -o Nat[a])"),
                       parse_type("[a<1] (Nat[0] -o Nat[0])"),
                       SumWitness{"c", {parse_type("Nat[c]"), parse_type("Nat[c]")}, Index::lit(1),
                                  Index::lit(1)},
                       none, {});
  CHECK(discharge(bad.goals, kNoDefs, bound(8)).status == Status::Invalid);
  auto bad2 = sum_modal(parse_type("[a<1] (Nat[a] -o Nat[a])"),
                        parse_type("[a<1] (Nat[0] -o Nat[0])"),
                        SumWitness{"c", zero, Index::lit(1), Index::lit(1)}, none, {});
  CHECK(discharge(bad2.goals, kNoDefs, bound(8)).status == Status::Valid);

  auto mixed = sum_modal(parse_type("Nat[1]"), parse_type("[a<1] (Nat[0] -o Nat[0])"), w, none,
                         {});
  CHECK_FALSE(mixed.goals.structural_ok());
  CHECK_FALSE(mixed.type);
}

TEST_CASE("bounded sums") {
  VarSet vs{"g"};
  auto n = bounded_sum_modal("a", Index::var("I"), parse_type("Nat[g]"), std::nullopt, vs, {});
  REQUIRE(n.type);
  CHECK(*n.type == parse_type("Nat[g]"));
  auto dep = bounded_sum_modal("a", Index::lit(3), parse_type("Nat[a]"), std::nullopt, vs, {});
  CHECK_FALSE(dep.goals.structural_ok());

  // sum over a < 3 of [b<2] A{c := b + 2a}, i.e. consecutive blocks of two
  LinearType a{parse_type("Nat[c]"), parse_type("Nat[0]")};
  auto s = bounded_sum_modal("a", Index::lit(3), parse_type("[b<2] (Nat[b + 2*a] -o Nat[0])"),
                             BoundedSumWitness{"c", a, Index::lit(2)}, {}, {});
  REQUIRE(s.type);
  CHECK(discharge(s.goals, kNoDefs, bound(8)).status == Status::Valid);
  CHECK(eval_index(s.type->bound(), {}, kNoDefs) == 6u);

  auto wrong = bounded_sum_modal("a", Index::lit(3), parse_type("[b<2] (Nat[b + a] -o Nat[0])"),
                                 BoundedSumWitness{"c", a, Index::lit(2)}, {}, {});
  CHECK(discharge(wrong.goals, kNoDefs, bound(8)).status == Status::Invalid);

  auto empty = bounded_sum_modal("a", Index::lit(0), parse_type("[b<7] (Nat[9] -o Nat[0])"),
                                 BoundedSumWitness{"c", a, Index::lit(7)}, {}, {});
  REQUIRE(empty.type);
  CHECK(discharge(empty.goals, kNoDefs, bound(8)).status == Status::Valid);
  CHECK(eval_index(empty.type->bound(), {}, kNoDefs) == 0u);
}

TEST_CASE("context sums") {
  Context g{{"x", parse_type("Nat[5]")}};
  Context d{{"y", parse_type("Nat[2]")}};
  auto r = sum_context(g, d, {}, {}, {});
  CHECK(r.ctx == Context{{"x", parse_type("Nat[5]")}, {"y", parse_type("Nat[2]")}});
  CHECK(r.goals.obligations.empty());
  CHECK(sum_context({}, {}, {}, {}, {}).ctx.empty());

  ModalType one = parse_type("[a<1] (Nat[a] -o Nat[0])");
  ModalType next = parse_type("[a<1] (Nat[a+1] -o Nat[0])");
  LinearType body{parse_type("Nat[c]"), parse_type("Nat[0]")};
  auto bang2 = sum_context({{"x", one}}, {{"x", next}},
                           {{"x", SumWitness{"c", body, Index::lit(1), Index::lit(1)}}}, {}, {});
  REQUIRE(bang2.ctx.count("x"));
  CHECK(to_string(bang2.ctx.at("x")) == "[c < 1 + 1] (Nat[c] -o Nat[0])");
  CHECK(discharge(bang2.goals, kNoDefs, bound(8)).status == Status::Valid);
  auto missing = sum_context({{"x", one}}, {{"x", next}}, {}, {}, {});
  CHECK_FALSE(missing.goals.structural_ok());
}

TEST_CASE("property: subtyping is a preorder") {
  gen::TypeGen g(77, {"x", "y"});
  int chains = 0;
  for (int n = 0; n < 300; ++n) {
    ModalType t = g.type(3);
    INFO(to_string(t));
    VarSet vs = vars_of(t);
    CHECK(subtype(vs, {}, t, t, kNoDefs, bound(16)).status == Status::Valid);
  }
  for (int n = 0; n < 300; ++n) {
    ModalType s0 = g.type(3);
    ModalType s1 = g.relax(s0, true);
    ModalType s2 = g.relax(s1, true);
    VarSet vs = vars_of(s0);
    INFO(to_string(s0) << " <: " << to_string(s1) << " <: " << to_string(s2));
    REQUIRE(subtype(vs, {}, s0, s1, kNoDefs, bound(16)).status == Status::Valid);
    REQUIRE(subtype(vs, {}, s1, s2, kNoDefs, bound(16)).status == Status::Valid);
    CHECK(subtype(vs, {}, s0, s2, kNoDefs, bound(16)).status == Status::Valid);
    ++chains;
  }
  CHECK(chains == 300);
}

TEST_CASE("property: subtyping respects erasure and index substitution") {
  gen::TypeGen g(91, {"x", "y"});
  for (int n = 0; n < 200; ++n) {
    ModalType s = g.type(2);
    ModalType t = g.type(2);
    VarSet vs{"x", "y"};
    if (subtype(vs, {}, s, t, kNoDefs, bound(6)).status == Status::Valid) {
      CHECK(erase_type(s) == erase_type(t));
    }
  }
  for (int n = 0; n < 150; ++n) {
    ModalType s = g.type(2);
    ModalType t = g.relax(s, n % 2 == 0);
    ConstraintSet hyps{le("x", "y + 2")};
    VarSet vs{"x", "y"};
    const ModalType& lo = n % 2 == 0 ? s : t;
    const ModalType& hi = n % 2 == 0 ? t : s;
    REQUIRE(subtype(vs, hyps, lo, hi, kNoDefs, bound(8)).status == Status::Valid);
    Index img = g.index(2);
    std::map<std::string, Index> sigma{{"x", img}};
    ConstraintSet hyps2{{subst_index(hyps[0].lhs, sigma), subst_index(hyps[0].rhs, sigma)}};
    INFO(to_string(lo) << " <: " << to_string(hi) << " with x := " << to_string(img));
    CHECK(subtype(vs, hyps2, subst_type(lo, sigma), subst_type(hi, sigma), kNoDefs, bound(8))
              .status == Status::Valid);
  }
}
