#pragma once
// Umbrella include for the whole engine.

#include "kgrag/chunker.hpp"
#include "kgrag/config.hpp"
#include "kgrag/embedding.hpp"
#include "kgrag/error.hpp"
#include "kgrag/evalkit.hpp"
#include "kgrag/extract.hpp"
#include "kgrag/generation.hpp"
#include "kgrag/graph.hpp"
#include "kgrag/ingest.hpp"
#include "kgrag/keywords.hpp"
#include "kgrag/retrieval.hpp"
#include "kgrag/store.hpp"
#include "kgrag/text.hpp"
#include "kgrag/vector_index.hpp"
