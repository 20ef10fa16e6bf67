pub mod erf_oracle;
