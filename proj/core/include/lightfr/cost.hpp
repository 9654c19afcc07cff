#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lightfr {

/// Inputs to the closed-form storage and communication estimates.
struct CostModel {
    double m = 105096;       // items
    double f = 32;           // embedding or code length
    double avg_profile = 38; // mean |I_u|
    double rho = 3;          // FedRec virtual-item sampling factor
    double layers = 2;       // MetaMF L
    double hidden = 8;       // MetaMF h
    double low_dim = 8;      // MetaMF s
    double key_bits = 1024;  // FedMF public key length

    /// Throws unless every field is positive and finite.
    void validate() const;
};

struct CostReport {
    std::string model;
    double storage_bytes = 0.0;
    double communication_bytes = 0.0;
};

/// Names accepted by cost_report, in table order.
const std::vector<std::string>& cost_model_names();

/// Evaluates one row of the cost table. Real-valued rows count 64-bit floats
/// (or key_bits-wide ciphertexts for FedMF) and divide by 8. The LightFR row is
/// a bit count, also divided by 8 here so every result is in bytes.
/// Throws on an unknown model name.
CostReport cost_report(std::string_view model, const CostModel& cm);

}  // namespace lightfr
