//! Gradients, losses, SGD and the synthetic training tasks.

pub mod backward;
pub mod checkpoint;
pub mod datasets;
pub mod loss;
pub mod train;

pub use backward::{backward, ParameterGradients};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use datasets::{make_synthetic_dataset, scale_blobs_split, Split, SyntheticDataset, TaskId};
pub use loss::{batch_loss, loss_eval, Target};
pub use train::{accuracy, detection_rate, evaluate_loss, predict_logits, sgd_step, sgd_train, TrainOptions};
