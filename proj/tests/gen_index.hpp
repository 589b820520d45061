#pragma once

#include <random>
#include <string>
#include <vector>

#include "dlpcf/index.hpp"

namespace gen {

// Random index terms over the given variables. Sum bounds and forest tables
// stay small so that evaluation terminates quickly.
class IndexGen {
 public:
  IndexGen(std::uint32_t seed, std::vector<std::string> vars)
      : rng_(seed), vars_(std::move(vars)) {}

  dlpcf::Index term(int depth) { return go(depth, vars_); }

  std::mt19937& rng() { return rng_; }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  dlpcf::Index leaf(const std::vector<std::string>& scope) {
    if (!scope.empty() && pick(3) != 0) return dlpcf::Index::var(scope[pick(int(scope.size()))]);
    return dlpcf::Index::lit(pick(5));
  }

  dlpcf::Index go(int depth, const std::vector<std::string>& scope) {
    using dlpcf::Index;
    if (depth <= 0) return leaf(scope);
    switch (pick(8)) {
      case 0:
        return leaf(scope);
      case 1:
        return Index::add(go(depth - 1, scope), go(depth - 1, scope));
      case 2:
        return Index::monus(go(depth - 1, scope), go(depth - 1, scope));
      case 3:
        return Index::mul(go(depth - 1, scope), leaf(scope));
      case 4:
        return Index::ifle(go(depth - 1, scope), go(depth - 1, scope), go(depth - 1, scope),
                           go(depth - 1, scope));
      case 5: {
        // Reuse existing names as binders to exercise shadowing and capture.
        std::string binder = pick(2) ? vars_[pick(int(vars_.size()))] : "s";
        auto inner = scope;
        inner.push_back(binder);
        Index bound = Index::ifle(go(depth - 1, scope), Index::lit(4), go(depth - 1, scope),
                                  Index::lit(2));
        return Index::sum(binder, Index::monus(bound, Index::lit(0)), go(depth - 1, inner));
      }
      case 6: {
        std::string binder = pick(2) ? vars_[pick(int(vars_.size()))] : "r";
        // Children: 2 for node 0 at most, else 0 or 1 below a cutoff. Finite.
        Index cutoff = Index::lit(pick(6));
        Index body = Index::ifle(Index::var(binder), cutoff, Index::lit(pick(3)), Index::lit(0));
        auto inner = scope;
        inner.push_back(binder);
        if (pick(2)) body = Index::mul(body, Index::ifle(go(depth - 1, inner), Index::lit(1),
                                                          Index::lit(1), Index::lit(0)));
        return Index::forest(binder, go(depth - 1, scope),
                             Index::ifle(go(depth - 1, scope), Index::lit(3), Index::lit(2),
                                         Index::lit(1)),
                             body);
      }
      default:
        return Index::add(leaf(scope), go(depth - 1, scope));
    }
  }

  std::mt19937 rng_;
  std::vector<std::string> vars_;
};

}  // namespace gen
