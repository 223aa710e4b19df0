#include "pcc/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "pcc/errors.hpp"
#include "pcc/fixtures.hpp"

namespace pcc {
namespace {

namespace fs = std::filesystem;

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.ds = {16, 8, 12, 12};
  cfg.dv = {4, 2, 4, 4};
  cfg.layers = 2;
  cfg.msg_depth = 1;
  cfg.lambda_hidden = 2;  // concatenated vector widths here are 18/14/12/12
  cfg.seed = 404;
  return cfg;
}

Pipeline demo_pipeline() {
  Rng rng(55);
  ProteinStructure s = make_mixed(28, rng);
  s.source_id = "demo";
  PipelineOptions opt;
  opt.knn = 5;
  return run_pipeline(std::move(s), opt);
}

TEST(ParamBlob, RoundTripsBitExactly) {
  const ModelParams p = init_params(small_config());
  const std::vector<uint8_t> bytes = params_to_bytes(p);
  const ModelParams q = params_from_bytes(bytes);
  EXPECT_EQ(q.config, p.config);
  const std::vector<uint8_t> again = params_to_bytes(q);
  EXPECT_EQ(again, bytes);
}

TEST(ParamBlob, FileRoundTrip) {
  const std::string path = temp_path("pcc_params_test.bin");
  const ModelParams p = init_params(small_config());
  save_params(path, p);
  const ModelParams q = load_params(path);
  EXPECT_EQ(params_to_bytes(q), params_to_bytes(p));
  std::remove(path.c_str());
  EXPECT_THROW(load_params(path), FileUnreadable);
}

TEST(ParamBlob, RejectsCorruption) {
  const ModelParams p = init_params(small_config());
  std::vector<uint8_t> bytes = params_to_bytes(p);

  std::vector<uint8_t> bad_magic = bytes;
  bad_magic[0] ^= 0xFF;
  EXPECT_THROW(params_from_bytes(bad_magic), CorruptBlob);

  std::vector<uint8_t> truncated(bytes.begin(), bytes.end() - 17);
  EXPECT_THROW(params_from_bytes(truncated), CorruptBlob);

  std::vector<uint8_t> trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(params_from_bytes(trailing), CorruptBlob);

  std::vector<uint8_t> version = bytes;
  version[4] ^= 0x01;
  EXPECT_THROW(params_from_bytes(version), VersionMismatch);
}

TEST(BundleBlob, RoundTripsBitExactly) {
  const Pipeline pipe = demo_pipeline();
  PipelineOptions opt;
  opt.knn = 5;
  const Bundle b = bundle_from_pipeline(pipe, opt);
  EXPECT_EQ(b.source_id, "demo");
  EXPECT_EQ(b.knn, 5);
  EXPECT_EQ(b.sse, pipe.sse);
  ASSERT_EQ(b.matrices.size(), kBundleMatrixNames.size());

  const std::vector<uint8_t> bytes = bundle_to_bytes(b);
  const Bundle c = bundle_from_bytes(bytes);
  EXPECT_EQ(c.source_id, b.source_id);
  EXPECT_EQ(c.edges, b.edges);
  EXPECT_EQ(c.sse, b.sse);
  EXPECT_EQ(bundle_to_bytes(c), bytes);

  // Stored features are the pipeline's, bit for bit.
  EXPECT_EQ(c.features.rank[0].s.rows(), pipe.features.rank[0].s.rows());
  for (int r = 0; r < 4; ++r) {
    const Eigen::MatrixXd& got = c.features.rank[r].s;
    const Eigen::MatrixXd& want = pipe.features.rank[r].s;
    ASSERT_EQ(got.rows(), want.rows());
    ASSERT_EQ(got.cols(), want.cols());
    EXPECT_EQ(std::memcmp(got.data(), want.data(),
                          sizeof(double) * static_cast<size_t>(got.size())),
              0);
  }
}

TEST(BundleBlob, RebuildMatchesStoredMatrices) {
  const Pipeline pipe = demo_pipeline();
  PipelineOptions opt;
  opt.knn = 5;
  Bundle b = bundle_from_pipeline(pipe, opt);
  const ProteinCC cc = rebuild_cc(b);
  EXPECT_EQ(cc.num_nodes(), 28);
  EXPECT_EQ(cc.edges(), pipe.cc.edges());

  // Tampering with a stored matrix must be caught.
  std::vector<Triplet> t = b.matrices[0].triplets();
  ASSERT_FALSE(t.empty());
  t[0].value = 2;
  b.matrices[0] = SparseInt::from_triplets(b.matrices[0].rows(),
                                           b.matrices[0].cols(), std::move(t));
  EXPECT_THROW(rebuild_cc(b), CorruptBlob);
}

TEST(BundleBlob, FileRoundTripAndCorruption) {
  const std::string path = temp_path("pcc_bundle_test.pcc");
  const Pipeline pipe = demo_pipeline();
  PipelineOptions opt;
  opt.knn = 5;
  const Bundle b = bundle_from_pipeline(pipe, opt);
  save_bundle(path, b);
  const Bundle c = load_bundle(path);
  EXPECT_EQ(bundle_to_bytes(c), bundle_to_bytes(b));

  std::vector<uint8_t> bytes = read_file_bytes(path);
  bytes.resize(bytes.size() / 2);
  write_file_atomic(path, bytes);
  EXPECT_THROW(load_bundle(path), CorruptBlob);
  std::remove(path.c_str());
  EXPECT_THROW(load_bundle(path), FileUnreadable);
}

TEST(Files, AtomicWriteReplaces) {
  const std::string path = temp_path("pcc_atomic_test.bin");
  write_file_atomic(path, {1, 2, 3});
  write_file_atomic(path, {9, 8});
  EXPECT_EQ(read_file_bytes(path), (std::vector<uint8_t>{9, 8}));
  std::remove(path.c_str());
}

}  // namespace
}  // namespace pcc
