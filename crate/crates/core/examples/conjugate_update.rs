//! Normal-gamma updating for one group: posterior parameters, the closed-form
//! marginal likelihood and its check against numerical integration.

use binclust::conjugate::{
    log_marginal_likelihood, log_marginal_sequential, posterior_params, NormalGammaParams,
};
use binclust::oracle::quadrature_log_marginal;

fn main() -> binclust::Result<()> {
    let prior = NormalGammaParams {
        omega: 0.0,
        c: 1.0,
        a: 1.1,
        b: 1.0,
    };
    let y = [7.6, 8.1, 8.4, 9.0];

    let post = posterior_params(&prior, &y)?;
    println!("prior     {prior:?}");
    println!("posterior {post:?}");
    println!(
        "E[mu | y] = {:.4}, E[lambda | y] = {:.4}",
        post.omega,
        post.a / post.b
    );

    println!(
        "log marginal, closed form  {:.10}",
        log_marginal_likelihood(&prior, &y)
    );
    println!(
        "log marginal, predictive   {:.10}",
        log_marginal_sequential(&prior, &y)
    );
    println!(
        "log marginal, quadrature   {:.10}",
        quadrature_log_marginal(&prior, &y)?
    );
    Ok(())
}
