#include <cmath>
#include <vector>

#include "citcp/mlp.hpp"
#include "citcp/rng.hpp"
#include "doctest.h"

using namespace citcp;

namespace {

// Scalar loss with a simple analytic derivative: L = sum_i out_i^2.
double loss_of(const Mlp& net, const std::vector<double>& x) {
  double l = 0.0;
  for (double o : net.forward(x)) l += o * o;
  return l;
}

}  // namespace

TEST_CASE("network construction is deterministic and shape-correct") {
  Mlp a({3, 5, 2}, 42);
  Mlp b({3, 5, 2}, 42);
  Mlp c({3, 5, 2}, 43);
  CHECK(a.params() == b.params());
  CHECK(a.params() != c.params());
  CHECK(a.input_size() == 3);
  CHECK(a.output_size() == 2);
  // weights 3*5 + biases 5 + weights 5*2 + biases 2
  CHECK(a.params().size() == 15 + 5 + 10 + 2);
  const std::vector<double> probe{0.1, -0.2, 0.3};
  CHECK(a.forward(probe).size() == 2);
}

TEST_CASE("backward matches central finite differences") {
  Mlp net({4, 6, 3, 1}, 7);
  Rng rng(11);
  std::vector<double> x(4);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);

  Mlp::Workspace ws;
  const auto& out = net.forward(x, ws);
  std::vector<double> dl_dout(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) dl_dout[i] = 2.0 * out[i];
  std::vector<double> grad(net.params().size(), 0.0);
  net.backward(ws, dl_dout, grad);

  const double eps = 1e-6;
  for (std::size_t p = 0; p < net.params().size(); ++p) {
    const double keep = net.params()[p];
    net.params()[p] = keep + eps;
    const double up = loss_of(net, x);
    net.params()[p] = keep - eps;
    const double dn = loss_of(net, x);
    net.params()[p] = keep;
    const double fd = (up - dn) / (2.0 * eps);
    CHECK(grad[p] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("backward accumulates rather than overwrites") {
  Mlp net({2, 3, 1}, 3);
  Mlp::Workspace ws;
  const std::vector<double> x{0.5, -0.25};
  net.forward(x, ws);
  const std::vector<double> unit{1.0};
  std::vector<double> once(net.params().size(), 0.0);
  net.backward(ws, unit, once);
  std::vector<double> twice(net.params().size(), 0.0);
  net.backward(ws, unit, twice);
  net.backward(ws, unit, twice);
  for (std::size_t p = 0; p < once.size(); ++p)
    CHECK(twice[p] == doctest::Approx(2.0 * once[p]));
}

TEST_CASE("apply_delta shifts parameters by scale times delta") {
  Mlp net({2, 2, 1}, 5);
  auto before = net.params();
  std::vector<double> delta(before.size(), 0.0);
  delta[0] = 1.0;
  delta.back() = -2.0;
  net.apply_delta(delta, 0.5);
  CHECK(net.params()[0] == doctest::Approx(before[0] + 0.5));
  CHECK(net.params().back() == doctest::Approx(before.back() - 1.0));
  for (std::size_t p = 1; p + 1 < before.size(); ++p)
    CHECK(net.params()[p] == before[p]);
}

TEST_CASE("both forward overloads agree") {
  Mlp net({3, 4, 2}, 9);
  const std::vector<double> x{0.3, -0.7, 1.1};
  Mlp::Workspace ws;
  CHECK(net.forward(x) == net.forward(x, ws));
}
