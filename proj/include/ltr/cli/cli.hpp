#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ltr/io/io.hpp"
#include "ltr/verifier/verifier.hpp"

namespace ltr::cli {

enum ExitCode : int {
    kRobust = 0,
    kNotRobust = 1,
    kUndecided = 2,
    kUsage = 10,
    kIo = 11,        // unreadable file, malformed document
    kInvalid = 12,   // shape, domain or model errors
    kInternal = 13,
};

/// Loads the network and image a query document names (relative paths resolve
/// against `base_dir`) and fills in the default label.
verifier::VerificationQuery materialize(const io::QueryDocument& doc, const std::string& base_dir);

/// Short domain name such as "translation[-1,1]x[-1,1]" or "subsample[2,3]+rho0.01".
std::string describe_domain(const std::vector<TransformationSpec>& specs, double rho);

/// Parses "a,b,c" into numbers; throws ParseError on anything else.
std::vector<double> parse_list(const std::string& text, std::size_t expected);

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ltr::cli
