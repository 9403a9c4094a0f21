#pragma once

// Small closed-form expression language for initial data profiles: sums and
// products of polynomials, trig/exp factors and Gaussians in (rho, theta, phi),
// with analytic first partials via forward-mode duals.

#include "scriwave/numerics.hpp"

#include <memory>
#include <string>

namespace scriwave::expr {

/// Value plus partials with respect to (rho, theta, phi).
struct Dual {
  double v = 0.0;
  double d[3] = {0.0, 0.0, 0.0};
};

class Expression {
 public:
  Expression() = default;                  // the zero expression
  static Expression parse(const std::string& text);

  double eval(double rho, double theta = 0.0, double phi = 0.0) const;
  Dual eval_dual(double rho, double theta = 0.0, double phi = 0.0) const;
  bool empty() const { return !root_; }
  const std::string& text() const { return text_; }

  struct Node;  // exposed for the parser implementation

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace scriwave::expr
