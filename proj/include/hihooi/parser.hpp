#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "hihooi/statement.hpp"

namespace hihooi {

// Parses one statement of the supported grammar (docs/grammar.md) and
// resolves every table/column reference against the catalog. Star
// projections are kept as a distinct marker, not expanded.
Statement parse(const std::string& sql, const SchemaCatalog& catalog);

// Logical-time source for NOW()/CURRENT_TIMESTAMP rewriting.
using ClockFn = std::function<int64_t()>;

// Replaces each NOW()/CURRENT_TIMESTAMP occurrence with one clock draw and
// each RAND() with one rng draw, making the statement deterministic.
// Statements without macros pass through unchanged.
Statement rewrite_nondeterministic(const Statement& stmt, const ClockFn& clock,
                                   std::mt19937_64& rng);

// The exact RAND() value a seeded generator produces; exposed so tests can
// run the same draw independently.
double rand_macro_draw(std::mt19937_64& rng);

}  // namespace hihooi
