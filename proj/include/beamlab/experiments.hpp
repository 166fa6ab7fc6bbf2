#ifndef BEAMLAB_EXPERIMENTS_HPP
#define BEAMLAB_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamlab/io.hpp"

namespace beamlab {

/** One quantitative pass/fail bar within an experiment report. */
struct Check {
    std::string name;
    double measured = 0.0;
    double bar = 0.0;
    std::string comparator;  // ">=", "<=", "=="
    bool pass = false;
};

struct ExperimentResult {
    std::string experiment;
    nlohmann::ordered_json summary;
    std::vector<Check> checks;
    bool all_passed = true;
};

/** Known experiment names, in canonical order. */
const std::vector<std::string>& experiment_names();

/** Runs the named experiment with the given key=value configuration,
 * writing data.csv, long.csv and summary.json under
 * <out>/<experiment>/. Sweep points that fail are marked failed in the
 * report; the run continues. Results do not depend on `jobs`. */
ExperimentResult run_experiment(const std::string& name, const KeyValueConfig& config,
                                const std::string& out_dir, int jobs);

}  // namespace beamlab

#endif
