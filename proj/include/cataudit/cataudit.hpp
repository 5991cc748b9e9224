#pragma once

// geometry.hpp (Eigen) goes before embedding_client.hpp: httplib pulls in
// <resolv.h>, whose _res macro breaks Eigen's headers if it is seen first.
#include "cataudit/error.hpp"
#include "cataudit/corpus.hpp"
#include "cataudit/vecmath.hpp"
#include "cataudit/geometry.hpp"
#include "cataudit/embedding_client.hpp"
#include "cataudit/rpfilter.hpp"
#include "cataudit/keywords.hpp"
#include "cataudit/hnsw.hpp"
#include "cataudit/cohesion.hpp"
#include "cataudit/demo.hpp"
#include "cataudit/pipeline.hpp"
