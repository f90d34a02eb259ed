#pragma once

// JSON and CSV emission for reports, plus a small structural schema check so emitted files can be
// re-parsed and validated.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "canosys/evans.hpp"
#include "canosys/spectral.hpp"

namespace canosys {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const CMat& m);  // {"re": [[...]], "im": [[...]]}
Json complex_to_json(cplx z);        // [re, im]
Json to_json(const EigenPair& pair);
Json to_json(const Witnesses& w);
Json to_json(const EssentialSpectrumBands& bands);
Json to_json(const WindingReport& report);
Json to_json(const ZeroModeReport& report);
Json to_json(const PsdReport& report);

/// lambda, re_D, im_D, abs_D
void write_scan_csv(std::ostream& os, const std::vector<ScanSample>& scan);
/// re_lambda, im_lambda, re_E, im_E, log_scale
void write_evans_csv(std::ostream& os, const std::vector<EvansValue>& values);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

/// Problems with the report's structure; empty when it matches the schema of its "command".
std::vector<std::string> validate_report(const Json& report);

}  // namespace canosys
