// yoho/yoho.hpp

// Copyright 2026 The yoho-sed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "yoho/common.hpp"
#include "yoho/audio_io.hpp"
#include "yoho/fft.hpp"
#include "yoho/features.hpp"
#include "yoho/label_codec.hpp"
#include "yoho/loss.hpp"
#include "yoho/postprocess.hpp"
#include "yoho/metrics.hpp"
#include "yoho/tensor.hpp"
#include "yoho/layers.hpp"
#include "yoho/network.hpp"
#include "yoho/augment.hpp"
#include "yoho/train.hpp"
#include "yoho/checkpoint.hpp"
#include "yoho/datagen.hpp"
#include "yoho/pipeline.hpp"
