// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "mimonerf/adam.hpp"
#include "mimonerf/mlp.hpp"
#include "testutil.hpp"

using namespace mimonerf;
using namespace mimonerf::test;

namespace {

MlpArchitecture small_arch() {
  MlpArchitecture arch;
  arch.n_p = 2;
  arch.main_input_dim = 10;
  arch.hidden_width = 8;
  arch.depth = 3;
  arch.skip_layers = {1};
  arch.aux_input_dim = 5;
  arch.color_hidden_width = 4;
  arch.validate();
  return arch;
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("init is deterministic per seed and fan-in bounded") {
  const MlpArchitecture arch = small_arch();
  const NetParams<float> a = mlp_init(arch, 7);
  const NetParams<float> b = mlp_init(arch, 7);
  CHECK(params_bitwise_equal(a, b));
  const NetParams<float> c = mlp_init(arch, 8);
  CHECK_FALSE(params_bitwise_equal(a, c));
  for (int t = 0; t < arch.tensor_count(); ++t) {
    const float bound = std::sqrt(6.0f / static_cast<float>(arch.tensor_in_dim(t)));
    CHECK(a.w[static_cast<size_t>(t)].cwiseAbs().maxCoeff() <= bound);
    CHECK(a.b[static_cast<size_t>(t)].cwiseAbs().maxCoeff() == 0.0f);
  }
}

TEST_CASE("layer shapes follow the architecture") {
  FieldConfig cfg = make_field_config(1, 64, 4, 10, 4);
  // 63-dim encoded position at 10 frequencies.
  CHECK(cfg.pos_enc.output_dim() == 63);
  CHECK(cfg.arch.main_input_dim == 63);
  const NetParams<float> p = mlp_init(cfg.arch, 1);
  CHECK(p.w[0].rows() == 64);
  CHECK(p.w[0].cols() == 63);
  CHECK(p.w[static_cast<size_t>(cfg.arch.sigma_index())].rows() == 1);
  CHECK(p.w[static_cast<size_t>(cfg.arch.color_out_index())].rows() == 3);
}

TEST_CASE("zero parameters map any input to zero raw output") {
  const MlpArchitecture arch = small_arch();
  NetParams<double> p = cast_params<double>(mlp_init(arch, 3));
  for (auto& w : p.w) w.setZero();
  for (auto& b : p.b) b.setZero();
  MatX<double> main_in = MatX<double>::Random(4, arch.main_input_dim);
  MatX<double> aux_in = MatX<double>::Random(4, arch.aux_input_dim);
  const MatX<double> raw = mlp_forward(arch, p, main_in, aux_in);
  CHECK(raw.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identical batch rows give identical outputs") {
  const MlpArchitecture arch = small_arch();
  const NetParams<double> p = cast_params<double>(mlp_init(arch, 5));
  MatX<double> main_in(2, arch.main_input_dim);
  main_in.row(0) = VecX<double>::LinSpaced(arch.main_input_dim, -1.0, 1.0).transpose();
  main_in.row(1) = main_in.row(0);
  MatX<double> aux_in(2, arch.aux_input_dim);
  aux_in.row(0) = VecX<double>::LinSpaced(arch.aux_input_dim, 0.0, 1.0).transpose();
  aux_in.row(1) = aux_in.row(0);
  const MatX<double> raw = mlp_forward(arch, p, main_in, aux_in);
  CHECK((raw.row(0) - raw.row(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hand-evaluated one-hidden-layer forward") {
  MlpArchitecture arch;
  arch.n_p = 1;
  arch.main_input_dim = 2;
  arch.hidden_width = 2;
  arch.depth = 1;
  arch.aux_input_dim = 1;
  arch.color_hidden_width = 2;
  NetParams<double> p;
  p.w.resize(5);
  p.b.resize(5);
  // trunk: h = relu(W x), W = [[1, -1], [2, 0.5]]
  p.w[0].resize(2, 2);
  p.w[0] << 1.0, -1.0, 2.0, 0.5;
  p.b[0].setZero(2);
  // feature = identity, sigma = sum, color branch picks feature[0] + aux
  p.w[1] = MatX<double>::Identity(2, 2);          // feature
  p.b[1].setZero(2);
  p.w[2].resize(1, 2);
  p.w[2] << 1.0, 1.0;                              // sigma = h0 + h1
  p.b[2].setZero(1);
  p.w[3].resize(2, 3);
  p.w[3] << 1.0, 0.0, 1.0, 0.0, 1.0, -1.0;         // color hidden over [feat, aux]
  p.b[3].setZero(2);
  p.w[4].resize(3, 2);
  p.w[4] << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  p.b[4].setZero(3);

  MatX<double> x(1, 2);
  x << 1.0, 0.0;
  MatX<double> aux(1, 1);
  aux << 0.25;
  const MatX<double> raw = mlp_forward(arch, p, x, aux);
  // h = relu([1, 2]) = [1, 2]; sigma = 3; feat = [1, 2];
  // color_in = [1, 2, 0.25]; ch = relu([1 + 0.25, 2 - 0.25]) = [1.25, 1.75];
  // rgb = [1.25, 1.75, 3.0]
  CHECK(raw(0, 0) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(raw(0, 1) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(raw(0, 2) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(raw(0, 3) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("backward: zero output gradient gives zero parameter gradient") {
  const MlpArchitecture arch = small_arch();
  const NetParams<double> p = cast_params<double>(mlp_init(arch, 5));
  MatX<double> main_in = 0.5 * MatX<double>::Random(3, arch.main_input_dim);
  MatX<double> aux_in = 0.5 * MatX<double>::Random(3, arch.aux_input_dim);
  ForwardTape<double> tape;
  mlp_forward(arch, p, main_in, aux_in, &tape);
  MlpGrads<double> grads;
  const MatX<double> zero_grad = MatX<double>::Zero(3, arch.output_dim());
  mlp_backward(arch, p, tape, zero_grad, &grads);
  for (const auto& w : grads.params.w) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward: single linear layer weight gradient is d_y x^T") {
  MlpArchitecture arch;
  arch.n_p = 1;
  arch.main_input_dim = 3;
  arch.hidden_width = 2;
  arch.depth = 1;
  arch.aux_input_dim = 1;
  arch.color_hidden_width = 2;
  NetParams<double> p = cast_params<double>(mlp_init(arch, 2));
  // Make the trunk affine-positive so the ReLU is the identity on this input.
  p.b[0].setConstant(10.0);
  MatX<double> x(1, 3);
  x << 0.3, -0.6, 0.9;
  MatX<double> aux(1, 1);
  aux << 0.0;
  ForwardTape<double> tape;
  mlp_forward(arch, p, x, aux, &tape);
  MatX<double> d_raw = MatX<double>::Zero(1, 4);
  d_raw(0, 3) = 1.0;  // pick out the sigma head
  MlpGrads<double> grads;
  mlp_backward(arch, p, tape, d_raw, &grads);
  // sigma = W_s h + b: dW_s = d_sigma * h^T
  const int s = arch.sigma_index();
  for (int c = 0; c < 2; ++c)
    CHECK(grads.params.w[static_cast<size_t>(s)](0, c) ==
          doctest::Approx(tape.h[0](0, c)).epsilon(1e-12));
}

TEST_CASE("backward matches central finite differences on random probes") {
  const MlpArchitecture arch = small_arch();
  NetParams<double> p = cast_params<double>(mlp_init(arch, 17));
  Rng rng(17);
  const int batch = 6;
  MatX<double> main_in(batch, arch.main_input_dim);
  MatX<double> aux_in(batch, arch.aux_input_dim);
  for (int r = 0; r < batch; ++r) {
    for (int c = 0; c < arch.main_input_dim; ++c) main_in(r, c) = rng.uniform(-1.0, 1.0);
    for (int c = 0; c < arch.aux_input_dim; ++c) aux_in(r, c) = rng.uniform(-1.0, 1.0);
  }
  // Scalar loss: weighted sum of raw outputs (fixed random weights).
  MatX<double> loss_w(batch, arch.output_dim());
  for (int r = 0; r < batch; ++r)
    for (int c = 0; c < arch.output_dim(); ++c) loss_w(r, c) = rng.uniform(-1.0, 1.0);
  auto loss = [&]() { return (mlp_forward(arch, p, main_in, aux_in).array() * loss_w.array()).sum(); };

  ForwardTape<double> tape;
  mlp_forward(arch, p, main_in, aux_in, &tape);
  MlpGrads<double> grads;
  grads.params.zero_like(p);
  mlp_backward(arch, p, tape, loss_w, &grads, true);

  for (int probe = 0; probe < 100; ++probe) {
    const ParamProbe pp = random_probe(p, rng);
    const double numeric = fd_param(p, pp.tensor, pp.bias, pp.index, 1e-5, loss);
    const double analytic = probe_grad(grads.params, pp);
    CHECK(rel_err(analytic, numeric) < 1e-4);
  }
  // Input gradient too.
  for (int probe = 0; probe < 20; ++probe) {
    const int r = static_cast<int>(rng.below(batch));
    const int c = static_cast<int>(rng.below(static_cast<uint64_t>(arch.main_input_dim)));
    const double orig = main_in(r, c);
    main_in(r, c) = orig + 1e-5;
    const double up = loss();
    main_in(r, c) = orig - 1e-5;
    const double down = loss();
    main_in(r, c) = orig;
    CHECK(rel_err(grads.main_in(r, c), (up - down) / 2e-5) < 1e-4);
  }
}

TEST_CASE("non-finite input is rejected") {
  const MlpArchitecture arch = small_arch();
  const NetParams<double> p = cast_params<double>(mlp_init(arch, 1));
  MatX<double> main_in = MatX<double>::Zero(1, arch.main_input_dim);
  main_in(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const MatX<double> aux_in = MatX<double>::Zero(1, arch.aux_input_dim);
  CHECK_THROWS_AS(mlp_forward(arch, p, main_in, aux_in), NumericError);
}

TEST_CASE("adam: zero gradient is the identity on parameters") {
  const MlpArchitecture arch = small_arch();
  NetParams<float> p = mlp_init(arch, 4);
  const NetParams<float> before = p;
  NetParams<float> g;
  g.zero_like(p);
  AdamState state = adam_init(p);
  adam_step(p, g, state);
  adam_step(p, g, state);
  CHECK(params_bitwise_equal(p, before));
  CHECK(state.t == 2);
}

TEST_CASE("adam: first step equals -lr g / (|g| + eps) on a scalar") {
  MlpArchitecture arch;
  arch.n_p = 1;
  arch.main_input_dim = 1;
  arch.hidden_width = 1;
  arch.depth = 1;
  arch.aux_input_dim = 1;
  arch.color_hidden_width = 1;
  NetParams<float> p = mlp_init(arch, 1);
  NetParams<float> g;
  g.zero_like(p);
  const float g0 = 0.37f;
  g.w[0](0, 0) = g0;
  AdamHyper hyper;
  hyper.lr = 1e-3f;
  AdamState state = adam_init(p, hyper);
  const float before = p.w[0](0, 0);
  adam_step(p, g, state);
  const float delta = p.w[0](0, 0) - before;
  const float expected = -hyper.lr * g0 / (std::abs(g0) + hyper.eps);
  CHECK(delta == doctest::Approx(expected).epsilon(1e-5));

  // Second step with the same gradient cannot grow in magnitude.
  const float prev = p.w[0](0, 0);
  adam_step(p, g, state);
  const float delta2 = p.w[0](0, 0) - prev;
  CHECK(std::abs(delta2) <= std::abs(delta) * (1.0f + 1e-5f));
}

TEST_CASE("adam rejects non-finite gradients naming the layer") {
  const MlpArchitecture arch = small_arch();
  NetParams<float> p = mlp_init(arch, 4);
  NetParams<float> g;
  g.zero_like(p);
  g.w[2](0, 0) = std::numeric_limits<float>::infinity();
  AdamState state = adam_init(p);
  CHECK_THROWS_WITH_AS(adam_step(p, g, state), doctest::Contains("layer 2"), NumericError);
}

}  // TEST_SUITE
