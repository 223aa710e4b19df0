#include "pcc/tcpnet.hpp"

#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "pcc/errors.hpp"
#include "pcc/fixtures.hpp"
#include "pcc/sse.hpp"

namespace pcc {
namespace {

Rep random_rep(Rng& rng, int64_t rows, int ds, int dv) {
  Rep h;
  h.s.resize(rows, ds);
  for (int64_t i = 0; i < rows; ++i) {
    for (int j = 0; j < ds; ++j) h.s(i, j) = rng.uniform(-2, 2);
  }
  for (int k = 0; k < 3; ++k) {
    h.v[k].resize(rows, dv);
    for (int64_t i = 0; i < rows; ++i) {
      for (int j = 0; j < dv; ++j) h.v[k](i, j) = rng.uniform(-2, 2);
    }
  }
  return h;
}

std::vector<Mat3> identity_frames(int64_t rows) {
  return std::vector<Mat3>(rows, Mat3::Identity());
}

bool mats_equal(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
  if (x.size() == 0) return true;
  return std::memcmp(x.data(), y.data(),
                     sizeof(double) * static_cast<size_t>(x.size())) == 0;
}

bool reps_equal(const Rep& a, const Rep& b) {
  return mats_equal(a.s, b.s) && mats_equal(a.v[0], b.v[0]) &&
         mats_equal(a.v[1], b.v[1]) && mats_equal(a.v[2], b.v[2]);
}

Pipeline small_pipeline(int n, uint64_t seed) {
  Rng rng(seed);
  ProteinStructure s = make_mixed(n, rng);
  PipelineOptions opt;
  opt.knn = 6;
  return run_pipeline(std::move(s), opt);
}

ModelConfig tiny_config(uint64_t seed, int layers = 1) {
  ModelConfig cfg;
  cfg.ds = {24, 12, 20, 16};
  cfg.dv = {8, 4, 8, 8};
  cfg.layers = layers;
  cfg.msg_depth = 1;
  cfg.lambda_embed = 1;
  cfg.lambda_hidden = 4;
  cfg.seed = seed;
  return cfg;
}

TEST(LayerNorm, StandardizesScalarsAndScalesVectors) {
  Rng rng(3);
  const Rep h = random_rep(rng, 5, 7, 4);
  const Rep out = gvp_layer_norm(h, nullptr);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(out.s.row(i).mean(), 0.0, 1e-12);
    const double var = out.s.row(i).array().square().mean();
    EXPECT_NEAR(var, 1.0, 1e-4);  // eps keeps it slightly under

    double sq = 0.0;
    for (int k = 0; k < 3; ++k) sq += h.v[k].row(i).squaredNorm();
    const double scale = 1.0 / std::sqrt(sq / 4.0 + 1e-8);
    for (int c = 0; c < 4; ++c) {
      EXPECT_NEAR(out.v[0](i, c), h.v[0](i, c) * scale, 1e-12);
    }
  }

  LnParams affine;
  affine.gain = Eigen::VectorXd::Constant(7, 2.0);
  affine.bias = Eigen::VectorXd::Constant(7, 0.5);
  const Rep out2 = gvp_layer_norm(h, &affine);
  EXPECT_NEAR(out2.s(1, 3), out.s(1, 3) * 2.0 + 0.5, 1e-12);
  EXPECT_NEAR(out2.v[1](2, 1), out.v[1](2, 1), 1e-15);  // affine is scalar-only

  LnParams bad;
  bad.gain = Eigen::VectorXd::Ones(3);
  bad.bias = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(gvp_layer_norm(h, &bad), ShapeMismatch);
}

TEST(Tcp, ShapesAndZeroRows) {
  Rng rng(9);
  const TcpShape shape{10, 8, 7, 5, 2};
  const TcpParams p = random_tcp(rng, shape);
  EXPECT_EQ(p.v_reduce.rows(), 3);
  EXPECT_EQ(p.v_down.rows(), 4);
  EXPECT_EQ(p.s_w.cols(), 10 + 9 + 4);

  const Rep h = random_rep(rng, 6, 10, 8);
  const Rep out = tcp_forward(p, h, identity_frames(6));
  EXPECT_EQ(out.s.rows(), 6);
  EXPECT_EQ(out.s.cols(), 7);
  EXPECT_EQ(out.v[0].cols(), 5);

  Rep empty;
  empty.s.resize(0, 10);
  for (int k = 0; k < 3; ++k) empty.v[k].resize(0, 8);
  const Rep eo = tcp_forward(p, empty, {});
  EXPECT_EQ(eo.s.rows(), 0);
  EXPECT_EQ(eo.s.cols(), 7);
  EXPECT_EQ(eo.v[0].cols(), 5);
}

TEST(Tcp, MatchesManualComputation) {
  Rng rng(21);
  const TcpShape shape{4, 4, 3, 2, 2};
  const TcpParams p = random_tcp(rng, shape);
  Rep h = random_rep(rng, 2, 4, 4);
  std::vector<Mat3> frames{rng.rotation(), rng.rotation()};
  const Rep out = tcp_forward(p, h, frames);

  for (int64_t i = 0; i < 2; ++i) {
    // Hidden scalar row: [s | scalarized reduced vectors | bottleneck norms].
    Eigen::VectorXd hin(4 + 9 + 2);
    hin.head(4) = h.s.row(i);
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 3; ++k) {
        double acc = 0.0;
        for (int l = 0; l < 3; ++l) {
          const double s3 = h.v[l].row(i).dot(p.v_reduce.row(c));
          acc += frames[i](k, l) * s3;
        }
        hin[4 + 3 * c + k] = acc;
      }
    }
    for (int b = 0; b < 2; ++b) {
      double sq = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double z = h.v[k].row(i).dot(p.v_down.row(b));
        sq += z * z;
      }
      hin[13 + b] = std::sqrt(sq);
    }
    const Eigen::VectorXd pre = p.s_w * hin + p.s_b;
    for (int j = 0; j < 3; ++j) {
      const double silu = pre[j] / (1.0 + std::exp(-pre[j]));
      EXPECT_NEAR(out.s(i, j), silu, 1e-12);
    }
    const Eigen::VectorXd gate_pre =
        p.gate_w * out.s.row(i).transpose() + p.gate_b;
    for (int j = 0; j < 2; ++j) {
      double zup = 0.0;
      for (int b = 0; b < 2; ++b) {
        zup += p.v_up(j, b) * h.v[0].row(i).dot(p.v_down.row(b));
      }
      const double gate = 1.0 / (1.0 + std::exp(-gate_pre[j]));
      EXPECT_NEAR(out.v[0](i, j), zup * gate, 1e-12);
    }
  }
}

TEST(Tcp, InitValidatesShape) {
  Rng rng(1);
  EXPECT_THROW(random_tcp(rng, TcpShape{4, 5, 3, 2, 2}), BadConfig);
  EXPECT_THROW(random_tcp(rng, TcpShape{4, 4, 0, 2, 1}), BadConfig);
}

TEST(Params, DeterministicInit) {
  ModelConfig cfg = tiny_config(77, 2);
  const ModelParams a = init_params(cfg);
  const ModelParams b = init_params(cfg);
  ASSERT_EQ(a.layers.size(), 2u);
  EXPECT_TRUE(mats_equal(a.embed[0].s_w, b.embed[0].s_w));
  EXPECT_TRUE(mats_equal(a.layers[1].msg_proj.v_up, b.layers[1].msg_proj.v_up));
  EXPECT_TRUE(a.layers[0].attn.isZero());
  EXPECT_TRUE(a.layers[0].ln[0].gain.isOnes());
  EXPECT_TRUE(a.layers[0].ln[2].bias.isZero());

  cfg.seed = 78;
  const ModelParams c = init_params(cfg);
  EXPECT_FALSE(mats_equal(a.embed[0].s_w, c.embed[0].s_w));

  ModelConfig bad = tiny_config(1);
  bad.layers = 0;
  EXPECT_THROW(init_params(bad), BadConfig);
  bad = tiny_config(1);
  bad.ds[0] = 0;
  EXPECT_THROW(init_params(bad), BadConfig);
}

TEST(Forward, OneLayerMatchesManualComposition) {
  const Pipeline p = small_pipeline(20, 5);
  const ModelParams model = init_params(tiny_config(11, 1));
  const auto out = forward(model, p.cc, p.features, p.scalarizers);

  // Same composition, spelled out step by step.
  std::array<Rep, 4> h = embed(model, p.features, p.scalarizers);
  const LayerParams& layer = model.layers[0];
  const Rep msg = edge_message(layer, h, p.cc, p.scalarizers);
  const Rep u2 = sse_update(layer, h, msg, p.cc, p.scalarizers);
  const Rep u0 = node_update(layer, h, msg, u2, p.cc, p.scalarizers);
  const Rep u3 = protein_update(layer, h, u0, u2, p.cc, p.scalarizers);

  Rep h3 = u3;
  h3.s += h[3].s;
  for (int k = 0; k < 3; ++k) h3.v[k] += h[3].v[k];
  Rep h0 = u0;
  h0.s += h[0].s;
  for (int k = 0; k < 3; ++k) h0.v[k] += h[0].v[k];
  Rep h2 = u2;
  h2.s += h[2].s;
  for (int k = 0; k < 3; ++k) h2.v[k] += h[2].v[k];

  EXPECT_TRUE(reps_equal(out[3], gvp_layer_norm(h3, &layer.ln[3])));
  EXPECT_TRUE(reps_equal(out[0], gvp_layer_norm(h0, &layer.ln[0])));
  EXPECT_TRUE(reps_equal(out[2], gvp_layer_norm(h2, &layer.ln[2])));
  EXPECT_TRUE(reps_equal(out[1], h[1]));  // edge channel is not updated
}

TEST(Forward, EmbeddedWidths) {
  const Pipeline p = small_pipeline(24, 6);
  const ModelParams model = init_params(ModelConfig{});
  const auto out = forward(model, p.cc, p.features, p.scalarizers);
  const int ds[4] = {128, 32, 128, 128};
  const int dv[4] = {16, 4, 16, 16};
  for (int r = 0; r < 4; ++r) {
    EXPECT_EQ(out[r].scalar_width(), ds[r]);
    EXPECT_EQ(out[r].vector_width(), dv[r]);
  }
  EXPECT_EQ(out[0].count(), 24);
  EXPECT_EQ(out[3].count(), 1);
}

TEST(Forward, RejectsWrongWidths) {
  const Pipeline p = small_pipeline(16, 8);
  const ModelParams model = init_params(tiny_config(2));
  FeatureSet bad = p.features;
  bad.rank[2].s.conservativeResize(bad.rank[2].s.rows(), 27);
  EXPECT_THROW(forward(model, p.cc, bad, p.scalarizers), ShapeMismatch);
}

TEST(Forward, ProteinChannelOptional) {
  const Pipeline p = small_pipeline(16, 9);
  ModelConfig cfg = tiny_config(3, 2);
  cfg.protein_channel = false;
  const ModelParams model = init_params(cfg);
  const auto out = forward(model, p.cc, p.features, p.scalarizers);
  EXPECT_EQ(out[3].count(), 0);
  EXPECT_EQ(out[0].count(), 16);
  EXPECT_THROW(readout(out, ReadoutMode::ProteinChannel),
               MissingProteinChannel);
  EXPECT_EQ(readout(out, ReadoutMode::MeanPool).size(), cfg.ds[0]);
}

TEST(Readout, ModesAgreeOnSingletons) {
  const Pipeline p = small_pipeline(18, 10);
  const ModelParams model = init_params(tiny_config(4));
  const auto out = forward(model, p.cc, p.features, p.scalarizers);

  const Eigen::VectorXd mean = readout(out, ReadoutMode::MeanPool);
  const Eigen::VectorXd sum = readout(out, ReadoutMode::SumPool);
  ASSERT_EQ(mean.size(), sum.size());
  for (int j = 0; j < mean.size(); ++j) {
    EXPECT_NEAR(sum[j], mean[j] * 18.0, 1e-9 * (1.0 + std::abs(sum[j])));
  }
  const Eigen::VectorXd prot = readout(out, ReadoutMode::ProteinChannel);
  EXPECT_EQ(prot.size(), 16);
  EXPECT_TRUE(prot.isApprox(out[3].s.row(0).transpose()));
}

TEST(Forward, SingleFloatTracksDouble) {
  const Pipeline p = small_pipeline(20, 12);
  const ModelParams model = init_params(tiny_config(6, 2));
  const auto out64 = forward(model, p.cc, p.features, p.scalarizers);
  const auto out32 = forward_f32(model, p.cc, p.features, p.scalarizers);
  for (int r = 0; r < 4; ++r) {
    ASSERT_EQ(out32[r].s.rows(), out64[r].s.rows());
    const double err =
        (out32[r].s.cast<double>() - out64[r].s).cwiseAbs().maxCoeff();
    EXPECT_LT(err, 1e-3);
  }
}

TEST(Aggregation, PrimitiveSemantics) {
  const SparseInt m =
      SparseInt::from_triplets(3, 4, {{0, 1, 1}, {0, 3, 1}, {2, 2, 1}});
  Eigen::MatrixXd src(4, 2);
  src << 1, 2, 3, 4, 5, 6, 7, 8;
  const Eigen::MatrixXd out = mean_rows(m, src);
  ASSERT_EQ(out.rows(), 3);
  EXPECT_DOUBLE_EQ(out(0, 0), 5.0);  // rows 1 and 3 averaged
  EXPECT_DOUBLE_EQ(out(0, 1), 6.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 0.0);  // empty neighborhood
  EXPECT_DOUBLE_EQ(out(2, 1), 6.0);

  const Eigen::MatrixXd all = mean_all_rows(src);
  ASSERT_EQ(all.rows(), 1);
  EXPECT_DOUBLE_EQ(all(0, 0), 4.0);

  const Eigen::MatrixXd g = gather_rows({2, -1, 0}, src, 2);
  ASSERT_EQ(g.rows(), 3);
  EXPECT_DOUBLE_EQ(g(0, 0), 5.0);
  EXPECT_TRUE(g.row(1).isZero());
  EXPECT_DOUBLE_EQ(g(2, 1), 2.0);
  EXPECT_THROW(gather_rows({4}, src, 2), ShapeMismatch);
}

TEST(Messages, AttentionGatesScalarsOnly) {
  const Pipeline p = small_pipeline(16, 14);
  ModelParams model = init_params(tiny_config(8));
  LayerParams& layer = model.layers[0];
  const std::array<Rep, 4> h = embed(model, p.features, p.scalarizers);

  // Freshly initialized attention is zero: every edge gets a 1/2 gate, so
  // twice the output recovers the ungated stack.
  const Rep half = edge_message(layer, h, p.cc, p.scalarizers);
  const Eigen::MatrixXd stack = 2.0 * half.s;

  Rng rng(99);
  for (int j = 0; j < layer.attn.size(); ++j) {
    layer.attn[j] = rng.uniform(-1, 1);
  }
  const Rep gated = edge_message(layer, h, p.cc, p.scalarizers);
  for (int64_t e = 0; e < gated.s.rows(); ++e) {
    const double gate =
        1.0 / (1.0 + std::exp(-stack.row(e).dot(layer.attn)));
    for (int j = 0; j < gated.s.cols(); ++j) {
      EXPECT_NEAR(gated.s(e, j), stack(e, j) * gate,
                  1e-9 * (1.0 + std::abs(stack(e, j))));
    }
  }
  // Vector channels ignore the gate entirely.
  for (int k = 0; k < 3; ++k) {
    EXPECT_TRUE(mats_equal(half.v[k], gated.v[k]));
  }
}

}  // namespace
}  // namespace pcc
