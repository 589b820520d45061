#include <doctest.h>

#include <set>

#include "corpus.hpp"
#include "dlpcf/cek.hpp"
#include "gen_pcf.hpp"

using namespace dlpcf;

namespace {

const char* kAdd = "fix f. \\y.\\z. ifz y then z else s(f (p y) z)";

Term add_2_3() { return apply(parse_term(kAdd), {Term::num(2), Term::num(3)}); }

// Largest tsize over the terms a process holds (closure, environments,
// frames).
Nat max_tsize(const Closure& c);

Nat max_tsize_env(const Env& e) {
  Nat best = 0;
  for (const EnvNode* n = e.head(); n; n = n->next.head()) {
    best = std::max(best, max_tsize(n->value));
  }
  return best;
}

Nat max_tsize(const Closure& c) { return std::max(tsize(c.term), max_tsize_env(c.env)); }

Nat max_tsize(const Process& p) {
  Nat best = max_tsize(p.closure);
  for (const auto& f : p.stack.frames()) {
    switch (f.kind) {
      case FrameKind::Fun:
      case FrameKind::Arg:
        best = std::max(best, max_tsize(f.closure));
        break;
      case FrameKind::Fork:
        best = std::max({best, tsize(f.zero), tsize(f.succ), max_tsize_env(f.env)});
        break;
      default:
        break;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("inject") {
  Process p = inject(Term::num(5));
  CHECK(p.closure.term == Term::num(5));
  CHECK(p.closure.env.empty());
  CHECK(p.stack.empty());
  CHECK(psize(p) == 0);
  CHECK(inject(add_2_3()).closure.env.empty());
  CHECK_THROWS_AS(inject(Term::var("x")), std::invalid_argument);
}

TEST_CASE("individual rules") {
  Env xi = Env{}.bind("y", Closure{Term::num(1), {}});
  // successor frame resets the environment
  auto s = step(Process{{Term::num(3), xi}, Stack{}.push(Frame::s())});
  REQUIRE(s);
  CHECK(s->kind == StepKind::Other);
  CHECK(s->rule == MachineRule::SuccFrame);
  CHECK(s->next == Process{{Term::num(4), {}}, {}});

  auto pz = step(Process{{Term::num(0), {}}, Stack{}.push(Frame::p())});
  REQUIRE(pz);
  CHECK(pz->next.closure.term == Term::num(0));

  Term tu = parse_term("f 2");
  auto app = step(Process{{tu, xi}, {}});
  REQUIRE(app);
  CHECK(app->next == Process{{Term::var("f"), xi}, Stack{}.push(Frame::arg({Term::num(2), xi}))});

  Closure id{parse_term("\\x. x"), {}};
  Closure v{Term::num(7), {}};
  auto beta = step(Process{v, Stack{}.push(Frame::fun(id))});
  REQUIRE(beta);
  CHECK(beta->kind == StepKind::Substitution);
  CHECK(beta->next == Process{{Term::var("x"), Env{}.bind("x", v)}, {}});

  Closure fx{parse_term("fix f. \\x. f x"), {}};
  auto unfold = step(Process{v, Stack{}.push(Frame::fun(fx))});
  REQUIRE(unfold);
  CHECK(unfold->kind == StepKind::Substitution);
  CHECK(unfold->rule == MachineRule::FunFix);
  CHECK(unfold->next ==
        Process{{fx.term.body(), Env{}.bind("f", fx)}, Stack{}.push(Frame::arg(v))});

  auto fork = step(Process{{Term::num(2), {}},
                           Stack{}.push(Frame::fork(Term::num(4), Term::num(5), xi))});
  REQUIRE(fork);
  CHECK(fork->next == Process{{Term::num(5), xi}, {}});

  CHECK_FALSE(step(Process{v, {}}).has_value());
  CHECK_FALSE(step(Process{id, Stack{}.push(Frame::s())}).has_value());
}

TEST_CASE("runs") {
  auto r = run(add_2_3(), 100000);
  CHECK(r.result == 5u);
  CHECK(r.status == RunStatus::Value);
  CHECK(run(parse_term("p(0)"), 100).result == 0u);
  CHECK(run(parse_term("ifz 0 then 4 else 5"), 100).result == 4u);
  auto d = run(parse_term("(fix f. \\x. f x) 0"), 1000);
  CHECK_FALSE(d.result.has_value());
  CHECK(d.status == RunStatus::Budget);
  CHECK(d.steps == 1000);
  CHECK(run(Term::num(7), 10).steps == 0);
}

TEST_CASE("traces") {
  auto t3 = trace(Term::num(3), 100);
  CHECK(t3.entries.size() == 1);
  CHECK_FALSE(t3.truncated);

  // app, arg-fun, fun-lam, var: four steps, five states.
  auto t = trace(parse_term("(\\x. x) 0"), 100);
  REQUIRE(t.entries.size() == 5);
  CHECK(t.entries[0].rule == MachineRule::App);
  CHECK(t.entries[1].rule == MachineRule::ArgToFun);
  CHECK(t.entries[2].rule == MachineRule::FunLam);
  CHECK(t.entries[3].rule == MachineRule::Var);
  CHECK(t.entries[4].process == Process{{Term::num(0), {}}, {}});
  std::vector<Nat> sizes;
  for (const auto& e : t.entries) sizes.push_back(e.psize);
  CHECK(sizes == std::vector<Nat>{2, 1, 0, 2, 0});
  std::string log = format_trace(t);
  CHECK(log.find("0  other  2  (\\x. x) 0  @  <>") == 0);
  CHECK(log.find("4  halt  0  0  @  <>") != std::string::npos);

  auto ta = trace(add_2_3(), 10000);
  Nat substitutions = 0;
  for (const auto& e : ta.entries) {
    if (e.kind == StepKind::Substitution) ++substitutions;
  }
  CHECK(substitutions == run(add_2_3(), 10000).substitution_steps);
  // three unfoldings and three calls of the two-argument body per level,
  // two levels deep plus the final call: (1 fix + 2 lambdas) * 3
  CHECK(substitutions == 9);
}

TEST_CASE("stack sizes") {
  Stack arg0 = Stack{}.push(Frame::arg({Term::num(0), {}}));
  CHECK(ssize(arg0) == 1);
  Stack fun_id = Stack{}.push(Frame::fun({parse_term("\\x. x"), {}}));
  CHECK(ssize(fun_id) == 0);
  Stack fork = Stack{}.push(Frame::fork(Term::var("x"), Term::num(0), {}));
  CHECK(ssize(fork) == 3);
  CHECK(ssize(fork.push(Frame::s()).push(Frame::p())) == 5);
}

TEST_CASE("corpus adequacy, size decrease and substitution slack") {
  auto progs = corpus::programs();
  REQUIRE(progs.size() >= 30);
  std::set<MachineRule> seen;
  for (const auto& p : progs) {
    INFO(p.name);
    Term t = parse_term(p.source);
    REQUIRE(infer_pcf(t) == SimpleType::nat());
    auto ref = eval_cbv(t, 1'000'000);
    auto mach = run(t, 10'000'000);
    REQUIRE(ref.status == RunStatus::Value);
    CHECK(mach.result == ref.value->numeral());
    if (p.expected) CHECK(mach.result == *p.expected);
    auto tr = trace(t, 10'000'000);
    for (std::size_t k = 0; k + 1 < tr.entries.size(); ++k) {
      const auto& e = tr.entries[k];
      seen.insert(*e.rule);
      Nat next = tr.entries[k + 1].psize;
      if (e.kind == StepKind::Other) {
        CHECK(next < e.psize);
      } else {
        CHECK(next <= e.psize + max_tsize(e.process));
      }
    }
  }
  CHECK(seen.size() == 12);
}

TEST_CASE("property: generated programs agree on both evaluators") {
  gen::PcfGen g(2024);
  int agreed = 0;
  for (int n = 0; n < 300; ++n) {
    Term t = g.program(5);
    auto ref = eval_cbv(t, 3000);
    if (ref.status != RunStatus::Value) continue;
    auto mach = run(t, 50'000'000);
    INFO(to_string(t));
    REQUIRE(mach.status == RunStatus::Value);
    CHECK(mach.result == ref.value->numeral());
    ++agreed;
  }
  CHECK(agreed >= 200);
}
