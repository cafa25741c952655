/*
   Copyright 2026 nestinf contributors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Minimal library walkthrough: combine per-subject summaries under a
// random-effects model and test the group effect against zero.

#include <iostream>
#include <vector>

#include "nestinf/combine.hpp"

int main() {
  using namespace nestinf;

  std::vector<SubjectEffect> effects = {
      {0.42, 0.030, EffectKind::WelchDiff, {64, 61}, {}},
      {0.51, 0.045, EffectKind::WelchDiff, {52, 70}, {}},
      {0.18, 0.021, EffectKind::WelchDiff, {77, 75}, {}},
      {0.66, 0.060, EffectKind::WelchDiff, {58, 55}, {}},
      {0.35, 0.028, EffectKind::WelchDiff, {71, 66}, {}},
  };

  const GroupResult group = combine_effects(effects, Model::RandomEffectsDL,
                                            WeightScheme::InverseVariance);
  const TestResult test = group_test(group, 0.0);
  const TestResult q = cochran_q(effects);
  const Interval ci = group_confidence_interval(group);

  std::cout << "tau^2      " << group.tau2 << "\n"
            << "theta_hat  " << group.theta_hat << "\n"
            << "var_hat    " << group.var_hat << "\n"
            << "95% CI     [" << ci.lo << ", " << ci.hi << "]\n"
            << "z          " << test.statistic << "\n"
            << "p (two)    " << test.p_two << "\n"
            << "Cochran Q  " << q.statistic << "  p " << q.p_one_high << "\n";
  return 0;
}
