//! Holds the acceptance suite (`cargo test -p brl-validation --test acceptance`).
