// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(chaintransport::cli::main_with_args(std::env::args_os()));
}
