#pragma once

#include <random>
#include <string>
#include <vector>

#include "dlpcf/pcf.hpp"

namespace gen {

// Random closed PCF programs of type Nat. Recursion only goes through
// fix f. \y. ifz y then .. else .. f (p y) .., so every program terminates.
class PcfGen {
 public:
  explicit PcfGen(std::uint32_t seed) : rng_(seed) {}

  dlpcf::Term program(int depth) {
    Scope s;
    return nat(depth, s);
  }

 private:
  struct Scope {
    std::vector<std::string> nats;
    std::vector<std::string> funs;  // Nat => Nat
    std::vector<dlpcf::Term> recursive;  // Nat-typed recursive calls in scope
  };

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string fresh(const char* base) { return base + std::to_string(counter_++); }

  dlpcf::Term leaf(const Scope& s) {
    using dlpcf::Term;
    if (!s.recursive.empty() && pick(3) == 0) return s.recursive[pick(int(s.recursive.size()))];
    if (!s.nats.empty() && pick(2) == 0) return Term::var(s.nats[pick(int(s.nats.size()))]);
    return Term::num(pick(4));
  }

  dlpcf::Term nat(int depth, const Scope& s) {
    using dlpcf::Term;
    if (depth <= 0) return leaf(s);
    switch (pick(9)) {
      case 0:
        return leaf(s);
      case 1:
        return Term::succ(nat(depth - 1, s));
      case 2:
        return Term::pred(nat(depth - 1, s));
      case 3:
        return Term::ifz(nat(depth - 1, s), nat(depth - 1, s), nat(depth - 1, s));
      case 4: {
        Scope inner = s;
        std::string x = fresh("x");
        inner.nats.push_back(x);
        return Term::app(Term::lam(x, nat(depth - 1, inner)), nat(depth - 1, s));
      }
      case 5:
      case 6:
        return Term::app(fun(depth - 1, s), nat(depth - 1, s));
      case 7: {
        // Higher order: (\g. g (g n)) F
        std::string g = fresh("g");
        Scope inner = s;
        inner.funs.push_back(g);
        Term body = Term::app(Term::var(g), Term::app(Term::var(g), nat(depth - 1, inner)));
        return Term::app(Term::lam(g, body), fun(depth - 1, s));
      }
      default:
        return Term::succ(leaf(s));
    }
  }

  dlpcf::Term fun(int depth, const Scope& s) {
    using dlpcf::Term;
    int choice = pick(s.funs.empty() ? 2 : 3);
    if (choice == 0) {
      Scope inner = s;
      std::string x = fresh("x");
      inner.nats.push_back(x);
      return Term::lam(x, nat(depth, inner));
    }
    if (choice == 2) return Term::var(s.funs[pick(int(s.funs.size()))]);
    std::string f = fresh("f");
    std::string y = fresh("y");
    Scope base = s;
    base.nats.push_back(y);
    Scope step = base;
    step.recursive.push_back(Term::app(Term::var(f), Term::pred(Term::var(y))));
    Term rec = Term::app(Term::var(f), Term::pred(Term::var(y)));
    Term succ_branch = pick(2) ? Term::succ(rec) : nat(depth, step);
    return Term::fix(f, Term::lam(y, Term::ifz(Term::var(y), nat(depth, base), succ_branch)));
  }

  std::mt19937 rng_;
  int counter_ = 0;
};

}  // namespace gen
