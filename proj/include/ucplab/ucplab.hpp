#pragma once

// Everything. The pipeline and verify headers need vendor/ (json) and
// libcrypto; link ucplab::io to get both.

#include "field.hpp"
#include "ucpf.hpp"
#include "elliptic.hpp"
#include "multiplier.hpp"
#include "stream.hpp"
#include "cauchy.hpp"
#include "matrix.hpp"
#include "similarity.hpp"
#include "interpolation.hpp"
#include "landis.hpp"
#include "corpus.hpp"
#include "pipeline.hpp"
#include "verify.hpp"
