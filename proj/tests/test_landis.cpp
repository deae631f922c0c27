#include <gtest/gtest.h>

#include "ucplab/landis.hpp"

using namespace ucplab;

TEST(LandisStep, Example) {
  const StepResult r = step({100.0, 1.5, 0.2});
  EXPECT_NEAR(static_cast<double>(r.T), 132.9573974236247, 1e-9);
  EXPECT_NEAR(static_cast<double>(r.R), 231.9573974236247, 1e-9);
  EXPECT_EQ(r.which, StepCase::Case1);
  EXPECT_DOUBLE_EQ(r.beta, 1.45);
  EXPECT_NEAR(r.params.p, 1.2, 1e-15);
  EXPECT_NEAR(r.params.q, 1.4, 1e-15);
}

TEST(LandisStep, Case2BelowThreshold) {
  const StepResult r = step({100.0, 1.05, 0.2}); // 1.05 <= 1/(1 - 0.2)
  EXPECT_EQ(r.which, StepCase::Case2);
  EXPECT_DOUBLE_EQ(r.final_exponent, 1.2);
  EXPECT_TRUE(r.log_factor);
}

TEST(LandisStep, Preconditions) {
  EXPECT_THROW(step({2.0, 1.5, 0.2}), Error);
  EXPECT_THROW(step({100.0, 1.0, 0.2}), Error);
  EXPECT_THROW(step({100.0, 1.5, 1.0}), Error);
}

TEST(LandisStep, LogSpaceMatchesDirect) {
  const StepResult a = step({1e6, 1.7, 0.1});
  const StepResult b = step_log(boost::multiprecision::log(Quad(1e6)), 1.7, 0.1);
  EXPECT_EQ(a.logR, b.logR);
  // S enormous: R stays finite in log space
  const StepResult c = step_log(Quad(1e5), 1.7, 0.1);
  EXPECT_TRUE(boost::multiprecision::isfinite(c.logR));
  EXPECT_GT(c.logR, Quad(1e5));
}

TEST(LandisSchedule, FortyThreeSteps) {
  const Schedule s = schedule_from(0.2, 2.0, 10.0);
  EXPECT_EQ(s.eps1, 0.1);
  EXPECT_EQ(s.N, 43);
  EXPECT_LE(s.N, s.N_bound);
  EXPECT_TRUE(s.ratios_hold);
  EXPECT_TRUE(s.strictly_decreasing);
  EXPECT_TRUE(s.S_increasing);
  EXPECT_LE(s.closed_form_error, 1e-12);
  ASSERT_EQ(s.trajectory.size(), 44u);
  EXPECT_GT(s.trajectory[42].alpha, 1.0 / 0.9);
  EXPECT_LE(s.trajectory[43].alpha, 1.0 / 0.9);
  EXPECT_TRUE(std::isnan(s.trajectory.back().ratio));
  for (std::size_t n = 0; n + 1 < s.trajectory.size(); ++n)
    EXPECT_LT(s.trajectory[n].ratio, 1.0 - 0.5 * 0.1 * 0.1);
}

TEST(LandisSchedule, RatioAtOnePointOneTwo) {
  // alpha = 1.12, eps1 = 0.1: next = 1.114
  const double next = 1.12 - 0.5 * 0.12 * 0.1;
  EXPECT_NEAR(next / 1.12, 0.9946428571428572, 1e-15);
  EXPECT_LT(next / 1.12, 1.0 - 0.5 * 0.1 * 0.1);
}

TEST(LandisSchedule, AlreadyBelowThreshold) {
  const Schedule s = schedule_from(0.2, 1.1, 10.0);
  EXPECT_EQ(s.N, 0);
  EXPECT_EQ(s.trajectory.size(), 1u);
}

TEST(LandisSchedule, SmallEpsStaysFinite) {
  const Schedule s = schedule_from(0.02, 2.0, 10.0);
  EXPECT_EQ(s.N, 917); // first n with 0.995^n <= 1/99
  EXPECT_TRUE(boost::multiprecision::isfinite(s.log_S_final));
  EXPECT_TRUE(s.S_increasing);
  EXPECT_LE(s.closed_form_error, 1e-12);
}

TEST(LandisSchedule, ClosedFormAndBoundOverGrid) {
  for (double eps1 : {0.02, 0.1, 0.25, 0.45})
    for (double a0 : {1.05, 1.5, 2.0}) {
      const Schedule s = schedule_from(2.0 * eps1, a0, 10.0, 20.0);
      EXPECT_LE(s.closed_form_error, 1e-12);
      EXPECT_LE(s.N, s.N_bound);
      EXPECT_TRUE(s.ratios_hold);
    }
  EXPECT_THROW(schedule_from(0.6, 2.0, 10.0), Error); // needs eps < eps0/(1+eps0)
  EXPECT_THROW(schedule_from(0.2, 2.5, 10.0), Error);
}

TEST(LandisAdmissibility, ThresholdIsExact) {
  const AdmissibilityThreshold t = admissibility_threshold(0.4, 1.0, 1.0, 1.0);
  ASSERT_TRUE(t.exists);
  EXPECT_NEAR(static_cast<double>(admissibility_margin_log(t.log_threshold, 0.4, 1.0, 1.0, 1.0)), 0.0, 1e-20);
  const double S = static_cast<double>(t.threshold());
  EXPECT_NEAR(S, 65.115, 1e-3);
  EXPECT_FALSE(admissibility(0.99 * S, 0.4, 1.0, 1.0, 1.0));
  EXPECT_TRUE(admissibility(1.01 * S, 0.4, 1.0, 1.0, 1.0));
}

TEST(LandisInitial, AlphaZero) {
  EXPECT_NEAR(initial_alpha(100.0, 1.0), 1.6649561755150555, 1e-14);
  EXPECT_DOUBLE_EQ(initial_alpha(1e6, 1e-3), 4.0 / 3.0); // floored
  try {
    initial_alpha(3.0, 50.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("9859.8"), std::string::npos) << e.what();
  }
  const Schedule s = run_schedule(0.2, 1.0, 100.0, 1.0, 1.0);
  EXPECT_NEAR(s.alpha0, 1.6649561755150555, 1e-14);
  ASSERT_TRUE(s.initial_threshold.has_value());
}
