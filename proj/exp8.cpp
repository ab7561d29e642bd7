#include <iostream>
#include <iomanip>
#include "gsmtl/bench.hpp"
#include "gsmtl/datagen.hpp"
using namespace gsmtl;
int main(int argc, char** argv) {
    const double margin = std::stod(argv[1]);
    const double mu = std::stod(argv[2]);
    const double lambda = std::stod(argv[3]);
    const int n_per_task = std::stoi(argv[4]);
    const int nseeds = argc > 5 ? std::stoi(argv[5]) : 10;
    double gs_gap_sum = 0.0, go_gap_sum = 0.0;
    for (int s = 0; s < nseeds; ++s) {
        const auto gen = gen_two_group_classification(29, 9, n_per_task, margin, 500 + s);
        SolverConfig config;
        config.hp.mu = mu;
        config.hp.lambda = lambda;
        config.hp.k = 2;
        config.hp.outer_max_iter = 50;
        config.hp.inner_max_iter = 300;
        const auto [gs_model, gs_rep] = fit(gen.data, gen.groups, config);
        const auto [go_model, go_rep] =
            fit(gen.data, GroupStructure::singletons(29), config);
        try {
            const auto [w1, a1] = support_similarity(gs_model.S, gen.groups);
            gs_gap_sum += w1 - a1;
        } catch (const Error& e) { std::cout << "GS degenerate seed " << s << "\n"; }
        try {
            const auto [w2, a2] = support_similarity(go_model.S, gen.groups);
            go_gap_sum += w2 - a2;
        } catch (const Error& e) { std::cout << "GO degenerate seed " << s << "\n"; }
    }
    std::cout << std::fixed << std::setprecision(4) << "margin=" << margin << " mu=" << mu
              << " lambda=" << lambda << " n=" << n_per_task
              << "  GS gap=" << gs_gap_sum / nseeds << "  GO gap=" << go_gap_sum / nseeds << "\n";
    return 0;
}
