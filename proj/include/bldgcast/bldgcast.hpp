#pragma once

#include "bldgcast/error.hpp"
#include "bldgcast/timeutil.hpp"
#include "bldgcast/rng.hpp"
#include "bldgcast/ingest.hpp"
#include "bldgcast/align.hpp"
#include "bldgcast/linalg.hpp"
#include "bldgcast/features.hpp"
#include "bldgcast/models/ridge.hpp"
#include "bldgcast/models/tree.hpp"
#include "bldgcast/models/forest.hpp"
#include "bldgcast/models/rmsprop.hpp"
#include "bldgcast/models/lstm.hpp"
#include "bldgcast/pipeline.hpp"
#include "bldgcast/serialize.hpp"
#include "bldgcast/eval.hpp"
#include "bldgcast/tune.hpp"
#include "bldgcast/datagen.hpp"
