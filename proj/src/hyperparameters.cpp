#include "alertlab/hyperparameters.hpp"

#include <sstream>

#include "alertlab/common.hpp"

namespace alertlab {

void Hyperparameters::validate() const {
    if (n < 1) throw ConfigError("hyperparameters: n must be >= 1");
    if (t <= 0) throw ConfigError("hyperparameters: t must be > 0 seconds");
    if (hidden_nodes < 1) throw ConfigError("hyperparameters: hidden_nodes must be >= 1");
    if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("hyperparameters: delta must lie in [0, 1]");
    if (!(tau_confidence > 0.0 && tau_confidence <= 1.0)) throw ConfigError("hyperparameters: tau_confidence must lie in (0, 1]");
    if (!(epsilon > 0.0)) throw ConfigError("hyperparameters: epsilon must be > 0");
    if (min_cluster_size < 1) throw ConfigError("hyperparameters: min_cluster_size must be >= 1");
}

std::string describe(const Hyperparameters& hp) {
    std::ostringstream os;
    os << "n=" << hp.n << " t=" << hp.t << " hidden=" << hp.hidden_nodes << " delta=" << hp.delta
       << " tau=" << hp.tau_confidence << " epsilon=" << hp.epsilon << " min_cluster=" << hp.min_cluster_size;
    return os.str();
}

}  // namespace alertlab
