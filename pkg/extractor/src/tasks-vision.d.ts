// Ambient declaration so the live-detector adapter type-checks without the
// optional @mediapipe/tasks-vision package installed.
declare module "@mediapipe/tasks-vision" {
  export const FilesetResolver: any;
  export const HandLandmarker: any;
}
