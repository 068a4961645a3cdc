// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "resil/campaign.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    resil::Campaign campaign;
    try {
        campaign = resil::parse_args(args);
    } catch (const resil::UsageError& e) {
        std::cerr << "resil-bench: " << e.what() << "\n"
                  << "try 'resil-bench --help'\n";
        return 2;
    }

    try {
        std::vector<resil::ReportRow> rows = resil::run_campaign(campaign);
        resil::emit(rows, campaign.format, campaign.out_path);
        for (const auto& row : rows) {
            if (!row.ok()) {
                std::cerr << "resil-bench: cell failed: " << row.variant << " (" << row.status
                          << ")\n";
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "resil-bench: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
