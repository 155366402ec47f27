#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "fnelearn/geometry.hpp"
#include "fnelearn/io.hpp"
#include "fnelearn/learn.hpp"
#include "fnelearn/paop.hpp"
#include "support.hpp"

using namespace fnelearn;
using testing_support::gaussian;
using testing_support::uniform_points;

namespace {

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!bit_equal(a.data()[i], b.data()[i])) return false;
  }
  return true;
}

io::json reparse(const io::json& j) { return io::json::parse(j.dump()); }

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("fnelearn_io_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(PartitionJson, RoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  // Awkward doubles: random mantissas, tiny and huge magnitudes.
  Eigen::MatrixXd pts = uniform_points(2, 40, rng);
  pts(0, 0) = 0.1 + 0.2;
  pts(1, 3) = 1.0 / 3.0;
  pts(0, 5) = std::nextafter(0.5, 1.0);
  auto p = delaunay_triangulate(NodeSet(pts));
  const auto q = io::partition_from_json(reparse(io::partition_to_json(p)));
  EXPECT_TRUE(bit_equal(q.nodes().points(), p.nodes().points()));
  ASSERT_EQ(q.size(), p.size());
  for (std::size_t t = 0; t < p.size(); ++t) EXPECT_EQ(q.simplex(t), p.simplex(t));
}

TEST(PartitionJson, LayoutMatchesFormat) {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, 1, 0, 0, 0, 1;
  const SimplicialPartition p(NodeSet(pts), {{0, 1, 2}});
  const auto j = io::partition_to_json(p);
  EXPECT_EQ(j.at("dim"), 2);
  EXPECT_EQ(j.at("points"), io::json::parse("[[0.0,0.0],[1.0,0.0],[0.0,1.0]]"));
  EXPECT_EQ(j.at("simplices"), io::json::parse("[[0,1,2]]"));
}

TEST(PartitionJson, MalformedInputsAreIoErrors) {
  const char* bad[] = {
      R"({"points":[[0,0],[1,0],[0,1]],"simplices":[[0,1,2]]})",             // no dim
      R"({"dim":2,"points":[[0,0],[1],[0,1]],"simplices":[[0,1,2]]})",        // short point
      R"({"dim":2,"points":[[0,0],[1,0],[0,1]],"simplices":[[0,1]]})",        // short simplex
      R"({"dim":2,"points":[[0,"a"],[1,0],[0,1]],"simplices":[[0,1,2]]})",    // non-numeric
      R"({"dim":2,"points":[],"simplices":[]})",                              // empty
  };
  for (const char* s : bad) EXPECT_THROW(io::partition_from_json(io::json::parse(s)), IoError) << s;
}

TEST(PartitionJson, UnreadableFileIsIoError) {
  const auto d = scratch("unreadable");
  EXPECT_THROW(io::read_partition((d / "missing.json").string()), IoError);
  io::write_text_file((d / "junk.json").string(), "{not json");
  EXPECT_THROW(io::read_partition((d / "junk.json").string()), IoError);
}

TEST(OperatorJson, RoundTripRecomputesCaches) {
  std::mt19937_64 rng(5);
  auto p = std::make_shared<const SimplicialPartition>(delaunay_triangulate(NodeSet(uniform_points(2, 30, rng))));
  PiecewiseAffineOperator op(p, gaussian(2, 30, rng), OperatorMeta{0.01, 10.0, 7});
  const auto d = scratch("op");
  const auto path = (d / "op.json").string();
  io::write_operator(path, op);
  const auto back = io::read_operator(path);
  EXPECT_TRUE(bit_equal(back->values(), op.values()));
  EXPECT_TRUE(bit_equal(back->partition().nodes().points(), p->nodes().points()));
  EXPECT_EQ(back->meta().epsilon_margin, 0.01);
  EXPECT_EQ(back->meta().training_noise, 10.0);
  EXPECT_EQ(back->meta().seed, 7u);
  for (std::size_t t = 0; t < p->size(); ++t) {
    EXPECT_TRUE(bit_equal(back->jacobian(t), op.jacobian(t)));
  }
  // Writing the loaded operator again gives the same bytes.
  const auto path2 = (d / "op2.json").string();
  io::write_operator(path2, *back);
  EXPECT_EQ(io::read_binary_file(path), io::read_binary_file(path2));
  for (int k = 0; k < 50; ++k) {
    const Eigen::Vector2d x = Eigen::Vector2d::Random() * 2.0;
    EXPECT_TRUE(bit_equal(back->evaluate(x), op.evaluate(x)));
  }
}

TEST(OperatorJson, RejectsBadValuesAndDegenerateSimplices) {
  auto base = io::json::parse(R"({"dim":2,"points":[[0,0],[1,0],[0,1]],"simplices":[[0,1,2]],
                                  "values":[[0,0],[1,0],[0,1]],"meta":{"epsilon_margin":0,"training_noise":0}})");
  EXPECT_NO_THROW(io::operator_from_json(base));
  auto few = base;
  few["values"] = io::json::parse("[[0,0],[1,0]]");
  EXPECT_THROW(io::operator_from_json(few), IoError);
  auto flat = base;
  flat["points"] = io::json::parse("[[0,0],[1,1],[2,2]]");
  EXPECT_THROW(io::operator_from_json(flat), Error);
  auto nan = base;
  nan["values"][1][0] = nullptr;
  EXPECT_THROW(io::operator_from_json(nan), IoError);
}

TEST(TrainsetJson, RoundTripAndFormat) {
  std::mt19937_64 rng(9);
  TrainingSet ts(gaussian(2, 12, rng), gaussian(2, 12, rng));
  const auto j = io::trainset_to_json(ts);
  ASSERT_EQ(j.at("pairs").size(), 12u);
  EXPECT_EQ(j.at("pairs")[0].at("x").size(), 2u);
  const auto back = io::trainset_from_json(reparse(j));
  EXPECT_TRUE(bit_equal(back.inputs(), ts.inputs()));
  EXPECT_TRUE(bit_equal(back.targets(), ts.targets()));
  EXPECT_THROW(io::trainset_from_json(io::json::parse(R"({"pairs":[]})")), IoError);
  EXPECT_THROW(io::trainset_from_json(io::json::parse(R"({"pairs":[{"x":[1,2],"z":[1]}]})")), IoError);
  EXPECT_THROW(io::trainset_from_json(io::json::parse(R"({"pairs":[{"x":[1,2]}]})")), IoError);
}

TEST(ConfigJson, FieldsOverrideBaseAndAreValidated) {
  AdmmConfig base;
  base.max_iters = 123;
  const auto c = io::admm_config_from_json(io::json::parse(R"({"rho0":2.5,"tol_primal":1e-8})"), base);
  EXPECT_EQ(c.rho0, 2.5);
  EXPECT_EQ(c.tol_primal, 1e-8);
  EXPECT_EQ(c.max_iters, 123);
  EXPECT_EQ(c.tol_dual, base.tol_dual);
  EXPECT_THROW(io::admm_config_from_json(io::json::parse(R"({"rho":1})")), InvalidConfig);
  EXPECT_THROW(io::admm_config_from_json(io::json::parse(R"({"rho0":-1})")), InvalidConfig);
  EXPECT_THROW(io::admm_config_from_json(io::json::parse(R"({"epsilon_margin":"x"})")), InvalidConfig);
  // Snapshot round trip.
  const auto again = io::admm_config_from_json(io::admm_config_to_json(c));
  EXPECT_EQ(io::admm_config_to_json(again), io::admm_config_to_json(c));
}

// Reference digests: FIPS 180 test vector and `git hash-object` output.
TEST(Hash, KnownDigests) {
  EXPECT_EQ(io::sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(io::git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(io::git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  std::string with_nul("a\0b", 3);
  EXPECT_NE(io::git_blob_sha1(with_nul), io::git_blob_sha1("a"));
}

TEST(Manifest, RoundTripAndSchema) {
  const auto d = scratch("manifest");
  const auto in = (d / "in.txt").string();
  io::write_text_file(in, "hello\n");
  io::RunManifest m;
  m.command = "train";
  m.config = {{"rho0", 1.0}};
  m.seed = 0;
  m.seconds = 1.5;
  m.add_input(in);
  const auto path = (d / "manifest.json").string();
  m.write(path);
  const auto j = io::read_json_file(path);
  EXPECT_EQ(j.at("schema"), "fne-learn/1");
  const auto back = io::manifest_from_json(j);
  EXPECT_EQ(back.command, "train");
  ASSERT_EQ(back.inputs.size(), 1u);
  EXPECT_EQ(back.inputs[0].sha1, "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(back.config, m.config);
  auto wrong = j;
  wrong["schema"] = "fne-learn/0";
  EXPECT_THROW(io::manifest_from_json(wrong), IoError);
}

TEST(Csv, HeadersAndRows) {
  std::ostringstream a, b;
  io::write_metric_csv(a, {{"circles", "tv-iso", 30, 0.35, 15, 30.5, 0.9, 100, 1.25}});
  EXPECT_EQ(a.str(), "image,method,eta,sigma,alpha,psnr,ssim,iters,seconds\ncircles,tv-iso,30,0.35,15,30.5,0.9,100,1.25\n");
  io::write_refine_csv(b, {{0, 0.5, 0.125, 2.0, 0.99}});
  EXPECT_EQ(b.str(), "level,longest_edge,min_measure,F_hat,max_lipschitz\n0,0.5,0.125,2,0.99\n");
}
