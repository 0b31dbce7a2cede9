#pragma once
// The four worked commentary segments: ground truth, first-pass output and
// the multi-agent second-pass output, with the published WERs.

#include <array>
#include <string_view>

namespace fixtures {

struct WorkedExample {
  std::string_view id;
  std::string_view ground_truth;
  std::string_view baseline;
  std::string_view enhanced;
  double baseline_wer;
  double enhanced_wer;
};

inline constexpr std::array<WorkedExample, 4> kWorkedExamples{{
    {"Tt8Cepx7HqY_seg011",
     "Jackson not a smart pass that time. Booker for three. It’s good! Devin Booker from downtown. "
     "It’s a one-point game.",
     "jackson not a smart pass that time booker for three devon bucker from downtown its a onepoint game",
     "jackson not a smart pass that time booker for three its good devin booker from downtown its a one "
     "point game",
     0.20, 0.10},
    {"Tt8Cepx7HqY_seg013",
     "Foul line jumper, Devin Booker, and the foul. Right now Booker is unguardable.",
     "foul on jumper right now booker is on guard",
     "foul line jumper devin booker and the foul right now booker is unguarded",
     0.62, 0.15},
    {"Tt8Cepx7HqY_seg017",
     "Rebound. Cousins couldn’t hold on, Booker off-balance gets it. A Cameron Payne three-pointer "
     "puts it in. Cameron Payne from downtown.",
     "rebound cousins couldnt hold on booker off balance gets it a cameron payne threepointer",
     "rebound cousins couldnt hold on booker off balance gets it to cameron payne threepointer puts it in "
     "cameron payne from downtown",
     0.45, 0.15},
    {"-71SWHoWQJI_seg002",
     "to play game four of round two of the NBA playoffs against the top-seeded Thunder. The Holmgren "
     "against Jokic at the mid-court circle. Tap is controlled by Jokic.",
     "to play game four of round two of the nba playoffs against the top seeded thunder",
     "to play game four of round two of the nba playoffs against the top seeded thunder holmgren against "
     "jokic at the midcourt circle tap is controlled by jokic",
     0.54, 0.11},
}};

}  // namespace fixtures
