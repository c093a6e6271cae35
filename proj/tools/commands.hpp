#pragma once
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace qcli {

using json = nlohmann::json;

struct Output {
    json result;
    std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
};

struct Command {
    std::string name;
    std::string help;
    json defaults;  // every accepted key with its default; the type of the default is enforced
    std::function<Output(const json&)> run;
};

const std::vector<Command>& commands();

// merges defaults, flags and the config file; throws qc::ConfigError
json resolve_config(const Command& c, const json& flags, const json& file);

// returns the process exit status
int run_cli(int argc, char** argv);

}  // namespace qcli
