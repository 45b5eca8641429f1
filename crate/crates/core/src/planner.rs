//! Spending an improvement budget across stages.
//!
//! Raising stage `v` by factor `a` costs `unit_cost(v) * (a - 1)`. To reach a
//! target throughput `t` the cheapest multiplier is `max(1, t / capacity(v))`
//! on every stage, and its cost is continuous and nondecreasing in `t`, so
//! the best reachable target is found by bisection on `t`.

use std::collections::BTreeMap;

use crate::model::{Multiplier, Pipeline, StageId};
use crate::scalar::{min_of, Scalar};
use crate::Error;

/// Linear cost per unit of `factor - 1`, plus a total budget.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel<S> {
    unit_cost: BTreeMap<StageId, S>,
    budget: S,
}

impl<S: Scalar> CostModel<S> {
    pub fn new<I, K>(unit_costs: I, budget: S) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (K, S)>,
        K: Into<StageId>,
    {
        if !budget.is_finite() || budget < S::zero() {
            return Err(Error::NegativeBudget(budget.to_string()));
        }
        let mut unit_cost = BTreeMap::new();
        for (stage, cost) in unit_costs {
            let stage = stage.into();
            if !cost.is_finite() || !cost.is_positive() {
                return Err(Error::NonPositiveUnitCost {
                    stage,
                    value: cost.to_string(),
                });
            }
            unit_cost.insert(stage, cost);
        }
        Ok(CostModel { unit_cost, budget })
    }

    /// Same unit cost on every stage of `pipeline`.
    pub fn uniform(pipeline: &Pipeline<S>, unit_cost: S, budget: S) -> Result<Self, Error> {
        CostModel::new(pipeline.stages().iter().map(|s| (s.clone(), unit_cost.clone())), budget)
    }

    pub fn budget(&self) -> &S {
        &self.budget
    }

    pub fn unit_cost(&self, stage: &str) -> Option<&S> {
        self.unit_cost.get(stage)
    }

    fn aligned<'c>(&'c self, pipeline: &Pipeline<S>) -> Result<Vec<&'c S>, Error> {
        if let Some(extra) = self.unit_cost.keys().find(|s| !pipeline.contains(s.as_str())) {
            return Err(Error::UnknownCostStage(extra.clone()));
        }
        pipeline
            .stages()
            .iter()
            .map(|s| self.unit_cost.get(s.as_str()).ok_or_else(|| Error::MissingUnitCost(s.clone())))
            .collect()
    }

    /// Cost of `multiplier` on `pipeline` under this model.
    pub fn cost_of(&self, pipeline: &Pipeline<S>, multiplier: &Multiplier<S>) -> Result<S, Error> {
        let costs = self.aligned(pipeline)?;
        let factors = pipeline.aligned_factors(multiplier)?;
        Ok(costs
            .into_iter()
            .zip(factors)
            .fold(S::zero(), |acc, (u, a)| acc + u.clone() * (a.clone() - S::one())))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AllocationResult<S> {
    pub multiplier: Multiplier<S>,
    pub achieved_throughput: S,
    pub spent: S,
    pub unspent: S,
}

fn finish<S: Scalar>(
    pipeline: &Pipeline<S>,
    costs: &CostModel<S>,
    multiplier: Multiplier<S>,
) -> Result<AllocationResult<S>, Error> {
    let spent = costs.cost_of(pipeline, &multiplier)?;
    Ok(AllocationResult {
        achieved_throughput: pipeline.perturbed_throughput(&multiplier)?,
        unspent: costs.budget.clone() - spent.clone(),
        spent,
        multiplier,
    })
}

/// Spends the budget on the unique bottleneck, stopping once it reaches the
/// next-slowest capacity (beyond that the bottleneck would move and the
/// extra spend would be wasted).
pub fn trivial_allocation<S: Scalar>(pipeline: &Pipeline<S>, costs: &CostModel<S>) -> Result<AllocationResult<S>, Error> {
    let unit = costs.aligned(pipeline)?;
    let mask = pipeline.bottleneck_mask();
    let tied = mask.iter().filter(|b| **b).count();
    if tied > 1 {
        return Err(Error::TiedBottlenecks { count: tied });
    }
    let b = mask.iter().position(|b| *b).expect("bottleneck set is nonempty");
    let caps = pipeline.capacities();

    let mut factor = S::one() + costs.budget.clone() / unit[b].clone();
    let next = min_of(caps.iter().enumerate().filter(|(i, _)| *i != b).map(|(_, c)| c.clone()));
    if let Some(next) = next {
        let cap = next / caps[b].clone();
        if cap < factor {
            factor = cap;
        }
    }
    let stage = pipeline.stages()[b].clone();
    finish(pipeline, costs, Multiplier::with_overrides(pipeline, [(stage, factor)])?)
}

/// Cheapest factors reaching throughput `target`.
fn profile<S: Scalar>(caps: &[S], target: &S) -> Vec<S> {
    caps.iter()
        .map(|c| {
            let needed = target.clone() / c.clone();
            if needed > S::one() {
                needed
            } else {
                S::one()
            }
        })
        .collect()
}

fn profile_cost<S: Scalar>(caps: &[S], unit: &[&S], target: &S) -> S {
    profile(caps, target)
        .into_iter()
        .zip(unit)
        .fold(S::zero(), |acc, (a, u)| acc + (*u).clone() * (a - S::one()))
}

/// Exact optimum of the piecewise-linear cost curve: the largest `t` with
/// `profile_cost(t) <= budget`.
fn water_level<S: Scalar>(caps: &[S], unit: &[&S], budget: &S) -> S {
    let mut order: Vec<usize> = (0..caps.len()).collect();
    order.sort_by(|&i, &j| caps[i].partial_cmp(&caps[j]).expect("capacities are comparable"));
    let (mut weight, mut rate) = (S::zero(), S::zero());
    for (k, &i) in order.iter().enumerate() {
        weight = weight + unit[i].clone();
        rate = rate + unit[i].clone() / caps[i].clone();
        if order.get(k + 1).is_some_and(|&j| caps[j] == caps[i]) {
            continue;
        }
        // With stages order[..=k] active, cost(t) = rate * t - weight.
        let level = (budget.clone() + weight.clone()) / rate.clone();
        match order.get(k + 1) {
            Some(&j) if level > caps[j] => continue,
            _ => return level,
        }
    }
    unreachable!("the last segment is unbounded")
}

/// Max-min allocation under the linear cost model.
///
/// The target is bracketed by bisection until the bracket is narrower than
/// `tolerance`. The exact optimum of the piecewise-linear cost curve is then
/// taken when it falls inside the bracket and is affordable; otherwise the
/// cheapest profile for the lower end of the bracket is returned. Either way
/// the result is feasible and within `tolerance` of the optimum.
pub fn maxmin_allocation<S: Scalar>(
    pipeline: &Pipeline<S>,
    costs: &CostModel<S>,
    tolerance: &S,
) -> Result<AllocationResult<S>, Error> {
    if !tolerance.is_finite() || !tolerance.is_positive() {
        return Err(Error::NonPositiveTolerance(tolerance.to_string()));
    }
    let unit = costs.aligned(pipeline)?;
    let caps = pipeline.capacities();
    let budget = &costs.budget;
    let two = S::from_int(2);

    // Lifting a stage of capacity T to t costs at least min_cost * (t/T - 1),
    // so the optimum is at most T * (1 + budget / min_cost).
    let base = pipeline.throughput();
    let cheapest = min_of(unit.iter().map(|u| (*u).clone())).expect("pipeline has at least one stage");
    let mut lo = base.clone();
    let mut hi = base.clone() * (S::one() + budget.clone() / cheapest);
    while hi.clone() - lo.clone() > *tolerance {
        let mid = (lo.clone() + hi.clone()) / two.clone();
        if profile_cost(caps, &unit, &mid) <= *budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let level = water_level(caps, &unit, budget);
    let target = if level >= lo && level <= hi && profile_cost(caps, &unit, &level) <= *budget {
        level
    } else {
        lo
    };
    let multiplier = Multiplier::new(pipeline.stages().iter().cloned().zip(profile(caps, &target)))?;
    finish(pipeline, costs, multiplier)
}
