#pragma once

#include <string>
#include <vector>

#include "dlpcf/types.hpp"
#include "gen_index.hpp"

namespace gen {

// Random modal types whose indices are total, plus sub- and supertypes
// obtained by moving interval bounds and copy counts.
class TypeGen {
 public:
  TypeGen(std::uint32_t seed, std::vector<std::string> vars)
      : idx_(seed, vars), vars_(std::move(vars)) {}

  dlpcf::ModalType type(int depth) { return go(depth, vars_); }

  // A supertype when up, a subtype otherwise.
  dlpcf::ModalType relax(const dlpcf::ModalType& t, bool up) {
    using dlpcf::Index;
    if (t.is_nat()) {
      Index k1 = Index::lit(pick(3));
      Index k2 = Index::lit(pick(3));
      if (up) return dlpcf::ModalType::nat(Index::monus(t.lo(), k1), t.hi() + k2);
      return dlpcf::ModalType::nat(t.lo() + k1, Index::monus(t.hi(), k2));
    }
    Index k = Index::lit(pick(2));
    Index bound = up ? Index::monus(t.bound(), k) : t.bound() + k;
    return dlpcf::ModalType::banged(t.binder(), bound, relax(t.dom(), !up), relax(t.cod(), up));
  }

  std::mt19937& rng() { return idx_.rng(); }
  dlpcf::Index index(int depth) { return idx_.term(depth); }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(idx_.rng()); }

  dlpcf::Index small(const std::vector<std::string>& scope) {
    using dlpcf::Index;
    Index v = scope.empty() ? Index::lit(pick(3)) : Index::var(scope[pick(int(scope.size()))]);
    switch (pick(4)) {
      case 0:
        return Index::lit(pick(4));
      case 1:
        return v;
      case 2:
        return v + Index::lit(pick(3));
      default:
        return Index::monus(v, Index::lit(1));
    }
  }

  dlpcf::ModalType go(int depth, const std::vector<std::string>& scope) {
    using dlpcf::Index;
    if (depth <= 0 || pick(3) == 0) {
      Index lo = small(scope);
      return dlpcf::ModalType::nat(lo, lo + Index::lit(pick(3)));
    }
    std::string a = "a" + std::to_string(depth);
    if (pick(3) == 0 && !scope.empty()) a = scope[pick(int(scope.size()))];
    Index bound = Index::lit(1 + pick(3));
    if (pick(2) && !scope.empty()) bound = small(scope) + Index::lit(1);
    auto inner = scope;
    inner.push_back(a);
    return dlpcf::ModalType::banged(a, bound, go(depth - 1, inner), go(depth - 1, inner));
  }

  IndexGen idx_;
  std::vector<std::string> vars_;
};

}  // namespace gen
