#include "lightfr/cost.hpp"

#include <cmath>

#include "lightfr/error.hpp"

namespace lightfr {

void CostModel::validate() const {
    for (double v : {m, f, avg_profile, rho, layers, hidden, low_dim, key_bits})
        if (!(v > 0.0) || !std::isfinite(v)) throw Error("cost model parameters must be positive and finite");
}

const std::vector<std::string>& cost_model_names() {
    static const std::vector<std::string> names{"FCF", "FedMF", "FedRec", "MetaMF", "PrivRec", "LightFR"};
    return names;
}

CostReport cost_report(std::string_view model, const CostModel& cm) {
    cm.validate();
    const double m = cm.m, f = cm.f, iu = cm.avg_profile;
    CostReport r{std::string(model), 0.0, 0.0};
    if (model == "FCF" || model == "PrivRec") {
        r.storage_bytes = (1 + m) * f * 64 / 8;
        r.communication_bytes = (iu + m) * f * 64 / 8;
    } else if (model == "FedMF") {
        r.storage_bytes = (1 + m) * f * cm.key_bits / 8;
        r.communication_bytes = (iu + m) * f * cm.key_bits / 8;
    } else if (model == "FedRec") {
        r.storage_bytes = (1 + m) * f * 64 / 8;
        r.communication_bytes = (iu * (1 + cm.rho) + m) * f * 64 / 8;
    } else if (model == "MetaMF") {
        const double lh = cm.layers * cm.hidden;
        r.storage_bytes = (m + lh) * f * 64 / 8;
        r.communication_bytes = (m * f + 2 * lh + f * cm.low_dim + cm.low_dim * m) * 64 / 8;
    } else if (model == "LightFR") {
        r.storage_bytes = (1 + m) * f / 8;
        r.communication_bytes = (iu + m) * f / 8;
    } else {
        throw Error("unknown cost model '" + std::string(model) +
                    "'; expected one of FCF, FedMF, FedRec, MetaMF, PrivRec, LightFR");
    }
    return r;
}

}  // namespace lightfr
