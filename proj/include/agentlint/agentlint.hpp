#pragma once

// Everything: ingest -> cpg -> unrt -> enrich -> reasoner -> oracles -> report.
#include "agentlint/config.hpp"
#include "agentlint/cpg.hpp"
#include "agentlint/defects.hpp"
#include "agentlint/enrich.hpp"
#include "agentlint/error.hpp"
#include "agentlint/ingest.hpp"
#include "agentlint/markers.hpp"
#include "agentlint/oracles.hpp"
#include "agentlint/pipeline.hpp"
#include "agentlint/reasoner.hpp"
#include "agentlint/registry.hpp"
#include "agentlint/report.hpp"
#include "agentlint/text.hpp"
#include "agentlint/unrt.hpp"
