#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "sgflow/io.hpp"
#include "sgflow/operators.hpp"

using namespace sgflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sgflow_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Io, StateRoundTripIsBitExact) {
  const auto g = PolarGrid::build(16, 16, 20.0, 20.0);
  FlowState st;
  st.t = 0.1 + 1e-17;
  st.u = perp_grad(ScalarField::sample(g, [](double r, double th) {
    return std::exp(-r) * std::sin(3.0 * th) / 3.0;
  }));
  st.q = ScalarField::sample(g, [](double r, double th) { return std::cos(r * th) * 1e-300; });
  st.psi = ScalarField::sample(g, [](double r, double) { return std::log(r) / 7.0; });
  const auto dir = scratch_dir("state");
  write_state(st, dir / "s0000");
  EXPECT_TRUE(fs::exists(dir / "s0000.csv"));
  EXPECT_TRUE(fs::exists(dir / "s0000.json"));
  const auto back = read_state(dir / "s0000", g);
  EXPECT_EQ(back.t, st.t);
  ASSERT_TRUE(back.u.stream().has_value());
  for (std::size_t k = 0; k < g->size(); ++k) {
    EXPECT_EQ(back.u.u1()[k], st.u.u1()[k]);
    EXPECT_EQ(back.u.u2()[k], st.u.u2()[k]);
    EXPECT_EQ(back.q[k], st.q[k]);
    EXPECT_EQ(back.psi[k], st.psi[k]);
    EXPECT_EQ((*back.u.stream())[k], (*st.u.stream())[k]);
  }
  EXPECT_THROW(read_state(dir / "s0000", PolarGrid::build(32, 16, 20.0, 20.0)), std::runtime_error);
}

TEST(Io, StepLogRoundTripIsBitExact) {
  std::vector<StepRecord> steps(3);
  for (int k = 0; k < 3; ++k) {
    steps[k].step = k;
    steps[k].window = k / 2;
    steps[k].t = k / 3.0;
    steps[k].energy = std::exp(-k) / 7.0;
    steps[k].q_min = -1e-310;
    steps[k].elliptic_residual = 1.0 / 3.0;
  }
  const auto back = parse_steps_csv(steps_csv(steps));
  ASSERT_EQ(back.size(), steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    EXPECT_EQ(back[k].step, steps[k].step);
    EXPECT_EQ(back[k].window, steps[k].window);
    EXPECT_EQ(back[k].t, steps[k].t);
    EXPECT_EQ(back[k].energy, steps[k].energy);
    EXPECT_EQ(back[k].q_min, steps[k].q_min);
    EXPECT_EQ(back[k].elliptic_residual, steps[k].elliptic_residual);
  }
  EXPECT_EQ(steps_csv(back), steps_csv(steps));
  EXPECT_THROW(parse_steps_csv("step,window,t\n0,0,1\n"), std::runtime_error);
  EXPECT_THROW(parse_steps_csv(""), std::runtime_error);
}

TEST(Io, AtomicWriteReplacesWithoutLeavingTemporaries) {
  const auto dir = scratch_dir("atomic");
  write_text_atomic(dir / "sub" / "a.txt", "first");
  write_text_atomic(dir / "sub" / "a.txt", "second");
  EXPECT_EQ(read_text(dir / "sub" / "a.txt"), "second");
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1);
}
