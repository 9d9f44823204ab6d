#pragma once

// JSON encoding for schedules, levels, certificates and reports. Exact
// values are written as {"num": "...", "den": "..."}; readers also accept
// rational strings such as "1/3", "0.125" or "2^-27", and plain integers.

#include <stdexcept>
#include <string>
#include <vector>

#include "gcantor/cantor_core.hpp"
#include "gcantor/certify.hpp"
#include "gcantor/littlewood.hpp"
#include "gcantor/local_extract.hpp"
#include "json.hpp"

namespace gcantor {

using Json = nlohmann::ordered_json;

/// Malformed input; the message carries the source name and the position
/// or JSON path of the problem.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json parse_json_text(const std::string& text, const std::string& source = "<input>");
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& value);

Json to_json(const Rational& x);
Rational rational_from_json(const Json& j, const std::string& where = "$");
Json to_json(const Enclosure& e);
Enclosure enclosure_from_json(const Json& j, const std::string& where = "$");
Json to_json(const ClosedInterval& iv);
ClosedInterval interval_from_json(const Json& j, const std::string& where = "$");

// --- Schedules ---------------------------------------------------------------------
//
// Explicit: {"root", "branching": [...], "budgets": [{"m","n","value"}],
//            "diagonals": [{"offset","value"}]}.
// Littlewood: {"littlewood": <instance params>} or a list of them under
// "littlewood" for a summed (intersected) schedule.

Json schedule_to_json(const CantorSchedule& s);
CantorSchedule schedule_from_json(const Json& j);

Json to_json(const InstanceParams& p);
InstanceParams params_from_json(const Json& j, const std::string& where = "$");

// --- Levels ------------------------------------------------------------------------

Json to_json(const LevelCollection& level);
LevelCollection level_from_json(const Json& j, const std::string& where = "$");
/// {"levels": [...]}.
Json levels_to_json(const std::vector<LevelCollection>& levels);
std::vector<LevelCollection> levels_from_json(const Json& j);

Json to_json(const RemovalLedger& ledger);

// --- Certificates and reports ------------------------------------------------------

Json to_json(const NonEmptinessCertificate& c);
Json to_json(const DimensionCertificate& c);
Json to_json(const DimensionBound& b);
Json to_json(const ParamsCertificate& c);
Json to_json(const RationalCandidate& c);
Json to_json(const WitnessLedger& l);

/// {"params": [...], "chain", "ledgers", "height_bound", "certified"}.
Json to_json(const WitnessCertificate& c);
/// Reads chain, params and height bound; ledgers are informational and
/// reproduced only as far as verification needs them (not at all).
WitnessCertificate witness_from_json(const Json& j);

Json to_json(const VerifyReport& r);
Json to_json(const LocalExtraction& x);
Json to_json(const ConditionReport& r);
Json to_json(const MeasureTable& m);
Json to_json(const MdpReport& r);
Json to_json(const DistributionReport& r);

}  // namespace gcantor
