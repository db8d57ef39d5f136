#include "orthostat/presets.hpp"

#include <stdexcept>

namespace orthostat {

namespace {

const std::vector<double> kX0 = {
    0.934738, 0.26696,   0.784097,    0.656448,  0.305308, 0.401958, 0.894594, 0.0559893,
    0.000643274, 0.0274513, 0.377754, 0.127474,  0.879907, 0.710555, 0.509949, 0.312682,
    0.0854376, 0.869372,  0.114232,   0.0851646, 0.254697, 0.560475, 0.508664, 0.0271565,
    0.426426,  0.457646,  0.913778,   0.40436,   0.407187, 0.0644401, 0.256718, 0.869761,
    0.0406222, 0.431362,  0.906228,   0.55979,   0.275852, 0.553722, 0.235762, 0.751627,
    0.178558,  0.411167,  0.100846,   0.220264,  0.215917, 0.490943, 0.596323, 0.0799147,
    0.205998,  0.0372218};

const std::vector<double> kX1 = {
    0.986304, 0.396331, 0.829442, 0.163461, 0.0583318, 0.0385021, 0.885504, 0.160447,
    0.583711, 0.389812, 0.193679, 0.632048, 0.2954,    0.12661,   0.440952, 0.949114,
    0.824362, 0.373311, 0.386399, 0.101208, 0.815355,  0.475999,  0.493653, 0.267819,
    0.0133166, 0.814708, 0.315126, 0.47199, 0.992467,  0.570161,  0.23285,  0.183045,
    0.92565,  0.199642, 0.38384,  0.184987, 0.518954,  0.078869,  0.456603, 0.333712,
    0.752504, 0.0212271, 0.805301, 0.696779, 0.0208987, 0.71065,  0.335234, 0.908037,
    0.94978,  0.318431};

const std::vector<double> kX2 = {
    0.268954, 0.486888, 0.22212,   0.915653,  0.795563, 0.797374, 0.826671, 0.11106,
    0.853911, 0.298177, 0.0628893, 0.679924,  0.792366, 0.986086, 0.936489, 0.273049,
    0.360604, 0.921974, 0.820319,  0.53683,   0.631468, 0.779267, 0.0763499, 0.669761,
    0.155254, 0.343043, 0.907627,  0.0647726, 0.0988953, 0.761094, 0.901974, 0.196523,
    0.939642, 0.794076, 0.225599,  0.66191,   0.912069, 0.0218007, 0.303759, 0.0650933,
    0.345452, 0.888144, 0.360429,  0.207685,  0.600649, 0.377979, 0.827548, 0.871934,
    0.364661, 0.384977};

const std::vector<double> kX3 = {
    0.0682295, 0.140096, 0.340508, 0.359852, 0.613812, 0.19288,   0.134531, 0.49299,
    0.591431,  0.893789, 0.773795, 0.604593, 0.842464, 0.882483,  0.93913,  0.872499,
    0.317102,  0.289739, 0.0178811, 0.160385, 0.814678, 0.0561101, 0.193425, 0.413272,
    0.622813,  0.668977, 0.771141, 0.884678, 0.516841, 0.54484,   0.54987,  0.101687,
    0.224264,  0.370917, 0.731496, 0.234507, 0.906523, 0.431445,  0.115241, 0.275449,
    0.810621,  0.0049892, 0.133457, 0.778419, 0.169455, 0.0719057, 0.1728,  0.906299,
    0.322143,  0.847235};

}  // namespace

const std::vector<double>& preset_input(const std::string& name) {
    if (name == "x0") return kX0;
    if (name == "x1") return kX1;
    if (name == "x2") return kX2;
    if (name == "x3") return kX3;
    throw std::domain_error("unknown input preset: " + name);
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"x0", "x1", "x2", "x3"};
    return names;
}

}  // namespace orthostat
