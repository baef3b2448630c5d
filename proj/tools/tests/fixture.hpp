#pragma once

#include <filesystem>

#include "ringtower/synth.hpp"
#include "temp_dir.hpp"

namespace testing_support {

// A short synthetic visit written to disk, with one knock on RV and one on LH.
struct SmallVisit {
  TempDir dir;
  ringtower::CaseSpec spec;
  std::filesystem::path root;

  SmallVisit() {
    spec.name = "visit";
    spec.seed = 31;
    spec.segment_frames = {70, 40, 40, 40};
    const auto r = ringtower::segment_ranges(spec);
    spec.jitters = {{ringtower::TowerId::RV, r[0].first + 15, r[0].first + 55, 3, 0, true},
                    {ringtower::TowerId::LH, r[1].first + 12, r[1].first + 20, 0, 3, true}};
    ringtower::write_case(spec, dir.path());
    root = dir.path() / spec.name;
  }

  std::filesystem::path frames() const { return root / "frames"; }
  std::filesystem::path timestamps() const { return root / "timestamps.csv"; }
  std::filesystem::path segmentation() const { return root / "segmentation.json"; }
  std::filesystem::path truth() const { return root / "truth.json"; }
  std::filesystem::path out(const std::string& name) const { return dir.path() / name; }
};

}  // namespace testing_support
