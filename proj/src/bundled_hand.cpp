// Copyright 2026 The dexgrasp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dexgrasp/hand_model.hpp"

namespace dexgrasp {

// Simplified five-finger hand, 22 joints, 15 keypoints. Identical text ships
// as assets/bundled22.handdesc. Frame convention: x toward the thumb, y out
// of the palm, z toward the fingertips; all lengths in meters.
const char* HandModel::bundled_descriptor_text() {
  return R"(handdesc v1
name bundled22
palm_axis 0 1 0
link palm
  parent none
  box 0.036 0.011 0.045  0 0 0.045  0 0 0
link ffknuckle
  parent palm
  origin 0.033 0 0.092  0 0 0
  axis 0 1 0
  limits -0.349 0.349
link ffproximal
  parent ffknuckle
  origin 0 0 0  0 0 0
  axis -1 0 0
  limits -0.262 1.571
  capsule 0.0085 0.010  0 0 0.024  0 0 0
link ffmiddle
  parent ffproximal
  origin 0 0 0.045  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0075 0.005  0 0 0.015  0 0 0
link ffdistal
  parent ffmiddle
  origin 0 0 0.028  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0070 0.0045  0 0 0.0135  0 0 0
link mfknuckle
  parent palm
  origin 0.011 0 0.092  0 0 0
  axis 0 1 0
  limits -0.349 0.349
link mfproximal
  parent mfknuckle
  origin 0 0 0  0 0 0
  axis -1 0 0
  limits -0.262 1.571
  capsule 0.0085 0.010  0 0 0.024  0 0 0
link mfmiddle
  parent mfproximal
  origin 0 0 0.045  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0075 0.005  0 0 0.015  0 0 0
link mfdistal
  parent mfmiddle
  origin 0 0 0.028  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0070 0.0045  0 0 0.0135  0 0 0
link rfknuckle
  parent palm
  origin -0.011 0 0.092  0 0 0
  axis 0 1 0
  limits -0.349 0.349
link rfproximal
  parent rfknuckle
  origin 0 0 0  0 0 0
  axis -1 0 0
  limits -0.262 1.571
  capsule 0.0085 0.010  0 0 0.024  0 0 0
link rfmiddle
  parent rfproximal
  origin 0 0 0.045  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0075 0.005  0 0 0.015  0 0 0
link rfdistal
  parent rfmiddle
  origin 0 0 0.028  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0070 0.0045  0 0 0.0135  0 0 0
link lfmetacarpal
  parent palm
  origin -0.033 0 0.060  0 0 0
  axis -1 0 0
  limits 0 0.785
link lfknuckle
  parent lfmetacarpal
  origin 0 0 0.032  0 0 0
  axis 0 1 0
  limits -0.349 0.349
link lfproximal
  parent lfknuckle
  origin 0 0 0  0 0 0
  axis -1 0 0
  limits -0.262 1.571
  capsule 0.0085 0.010  0 0 0.024  0 0 0
link lfmiddle
  parent lfproximal
  origin 0 0 0.045  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0075 0.005  0 0 0.015  0 0 0
link lfdistal
  parent lfmiddle
  origin 0 0 0.028  0 0 0
  axis -1 0 0
  limits 0 1.571
  capsule 0.0070 0.0045  0 0 0.0135  0 0 0
link thbase
  parent palm
  origin 0.046 0 0.008  0 1.25 0
  axis 0 -1 0
  limits -0.30 1.00
link thabd
  parent thbase
  origin 0 0 0  0 0 0
  axis -1 0 0
  limits -0.17 0.95
link thproximal
  parent thabd
  origin 0 0 0  0 0 0
  axis 0 -1 0
  limits -0.35 1.05
  capsule 0.0105 0.008  0 0 0.024  0 0 0
link thmiddle
  parent thproximal
  origin 0 0 0.040  0 0 0
  axis 0 -1 0
  limits 0 1.05
  capsule 0.0092 0.0055  0 0 0.015  0 0 0
link thdistal
  parent thmiddle
  origin 0 0 0.032  0 0 0
  axis 0 -1 0
  limits 0 1.05
  capsule 0.0085 0.005  0 0 0.013  0 0 0
keypoint ffproximal 0 0 0
keypoint ffmiddle 0 0 0
keypoint ffdistal 0 0 0.025
keypoint mfproximal 0 0 0
keypoint mfmiddle 0 0 0
keypoint mfdistal 0 0 0.025
keypoint rfproximal 0 0 0
keypoint rfmiddle 0 0 0
keypoint rfdistal 0 0 0.025
keypoint lfproximal 0 0 0
keypoint lfmiddle 0 0 0
keypoint lfdistal 0 0 0.025
keypoint thproximal 0 0 0
keypoint thmiddle 0 0 0
keypoint thdistal 0 0 0.0265
contact ffdistal 0 0.0070 0.015
contact mfdistal 0 0.0070 0.015
contact rfdistal 0 0.0070 0.015
contact lfdistal 0 0.0070 0.015
contact thdistal -0.0085 0 0.015
)";
}

const HandModel& HandModel::bundled() {
  static const HandModel model = HandModel::parse(bundled_descriptor_text());
  return model;
}

}  // namespace dexgrasp
