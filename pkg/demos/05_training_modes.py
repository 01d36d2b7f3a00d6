"""Train the four modes on one community graph and compare them.

Standard supervised training, virtual adversarial training, graph
adversarial training, and their combination share the same minimax loop:
generate worst-case perturbations at the frozen parameters, then take one
adaptive-moment step against the composite objective.
"""

from graphadv import Mode, TrainConfig, generate_sbm, train

ds = generate_sbm(2, 100, 0.05, 0.005, feature_dim=16, noise_scale=4.0, seed=0)

print(f"{'mode':<10} {'epochs':>6} {'best val':>9} {'test':>7} {'final loss':>11}")
for mode in Mode:
    config = TrainConfig(
        mode=mode, dropout=0.0, beta=0.5, epsilon=0.05, seed=0,
    )
    params, history = train(ds, config)
    best = history.best_record()
    print(f"{mode.value:<10} {history.num_epochs:>6} {best.val_acc:>9.4f} "
          f"{best.test_acc:>7.4f} {history.records[-1].train_loss:>11.4f}")
